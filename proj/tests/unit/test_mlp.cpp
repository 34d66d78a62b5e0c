#include "pulsehr/error.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace pulsehr;
using namespace pulsehr::models;

namespace {

double max_relative_error(Activation act, double alpha, std::uint64_t seed) {
  const std::vector<std::uint32_t> sizes{4, 6, 5, 3, 1};
  auto net = MlpNetwork::init(sizes, act, seed);
  Rng rng(seed + 100);
  // keep every pre-activation off the ReLU kink
  for (auto& layer : net.biases)
    for (auto& b : layer)
      b = rng.uniform(-0.1, 0.1);
  std::vector<double> x(5 * 4), y(5);
  for (auto& v : x)
    v = rng.normal();
  for (auto& v : y)
    v = rng.normal();

  const auto grad = mlp_loss_gradient(net, x, y, alpha);
  CHECK(grad.loss == doctest::Approx(mlp_loss(net, x, y, alpha)).epsilon(1e-12));
  constexpr double h = 1e-5;
  double worst = 0.0;
  const auto check = [&](auto get, double analytic) {
    MlpNetwork plus = net, minus = net;
    get(plus) += h;
    get(minus) -= h;
    const double numeric = (mlp_loss(plus, x, y, alpha) - mlp_loss(minus, x, y, alpha)) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].size(); ++i)
      check([&](MlpNetwork& n) -> double& { return n.weights[l][i]; }, grad.weights[l][i]);
    for (std::size_t i = 0; i < net.biases[l].size(); ++i)
      check([&](MlpNetwork& n) -> double& { return n.biases[l][i]; }, grad.biases[l][i]);
  }
  return worst;
}

dataset::FeatureMatrix data(std::size_t n, std::size_t k, bool constant) {
  Rng rng(17);
  dataset::FeatureMatrix fm(k);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto& v : x) {
      v = rng.uniform(60, 120);
      s += v;
    }
    fm.add_row(x, constant ? 88.0 : s / static_cast<double>(k), static_cast<double>(i));
  }
  return fm;
}

} // namespace

TEST_CASE("back-propagation matches central differences") {
  for (Activation act : {Activation::tanh, Activation::relu})
    for (double alpha : {0.0, 0.3})
      for (std::uint64_t seed : {1u, 2u, 3u})
        CHECK(max_relative_error(act, alpha, seed) < 1e-4);
}

TEST_CASE("constant labels are learned") {
  const auto fm = data(200, 5, true);
  MlpParams hp;
  hp.alpha = 1e-5;
  const auto m = fit_mlp(fm, hp);
  for (std::size_t i = 0; i < fm.rows(); ++i)
    CHECK(std::abs(m.predict_raw(fm.row(i)) - 88.0) <= 0.5);
}

TEST_CASE("same seed gives the same weights") {
  const auto fm = data(120, 4, false);
  MlpParams hp;
  hp.max_epochs = 30;
  hp.seed = 9;
  const auto a = fit_mlp(fm, hp);
  const auto b = fit_mlp(fm, hp);
  CHECK(a == b);
  hp.seed = 10;
  CHECK_FALSE(fit_mlp(fm, hp) == a);
}

TEST_CASE("mean of inputs is learned well") {
  const auto fm = data(600, 3, false);
  MlpParams hp;
  hp.activation = Activation::tanh;
  const auto m = fit_mlp(fm, hp);
  double err = 0.0;
  for (std::size_t i = 0; i < fm.rows(); ++i)
    err += std::abs(m.predict_raw(fm.row(i)) - fm.label(i));
  CHECK(err / static_cast<double>(fm.rows()) < 2.0);
}

TEST_CASE("network shape and initialisation bounds") {
  const std::vector<std::uint32_t> sizes{15, 2, 15, 7, 1};
  const auto net = MlpNetwork::init(sizes, Activation::relu, 4);
  REQUIRE(net.layer_count() == 4);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(net.weights[l].size() == sizes[l] * sizes[l + 1]);
    CHECK(net.biases[l].size() == sizes[l + 1]);
    const double bound = std::sqrt(6.0 / sizes[l]);
    for (double w : net.weights[l])
      CHECK(std::abs(w) <= bound);
  }
}

TEST_CASE("tiny training sets still fit") {
  const auto fm = data(3, 2, false);
  MlpParams hp;
  hp.max_epochs = 5;
  CHECK_NOTHROW(fit_mlp(fm, hp));
  CHECK_THROWS_AS(fit_mlp(dataset::FeatureMatrix(2), hp), Error);
}
