#include "pulsehr/models/mlp.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace pulsehr::models {

namespace {

double activate(Activation act, double z) noexcept {
  return act == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

/// Derivative expressed through the activation output a = act(z).
double activate_grad(Activation act, double z, double a) noexcept {
  return act == Activation::relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

struct Workspace {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> delta;

  explicit Workspace(const MlpNetwork& net) {
    const std::size_t layers = net.layer_count();
    z.resize(layers);
    a.resize(layers + 1);
    delta.resize(layers);
    a[0].resize(net.sizes[0]);
    for (std::size_t l = 0; l < layers; ++l) {
      z[l].resize(net.sizes[l + 1]);
      a[l + 1].resize(net.sizes[l + 1]);
      delta[l].resize(net.sizes[l + 1]);
    }
  }
};

double forward_into(const MlpNetwork& net, std::span<const double> x, Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.a[0].begin());
  const std::size_t layers = net.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = net.sizes[l];
    const std::size_t out = net.sizes[l + 1];
    const auto& w = net.weights[l];
    for (std::size_t o = 0; o < out; ++o) {
      double s = net.biases[l][o];
      const double* wr = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i)
        s += wr[i] * ws.a[l][i];
      ws.z[l][o] = s;
      ws.a[l + 1][o] = l + 1 == layers ? s : activate(net.activation, s);
    }
  }
  return ws.a[layers][0];
}

double weight_penalty(const MlpNetwork& net) {
  double sq = 0.0;
  for (const auto& w : net.weights)
    for (double v : w)
      sq += v * v;
  return sq;
}

/// Accumulates d(loss)/d(params) for the rows in `rows` into `grad`.
double accumulate_gradient(const MlpNetwork& net, std::span<const double> x,
                           std::span<const double> y, std::span<const std::size_t> rows,
                           double alpha, Workspace& ws, MlpGradient& grad) {
  const std::size_t k = net.sizes[0];
  const std::size_t layers = net.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    grad.weights[l].assign(net.weights[l].size(), 0.0);
    grad.biases[l].assign(net.biases[l].size(), 0.0);
  }
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  double sse = 0.0;
  for (std::size_t r : rows) {
    const double out = forward_into(net, x.subspan(r * k, k), ws);
    const double err = out - y[r];
    sse += err * err;
    ws.delta[layers - 1][0] = 2.0 * err * inv_b;
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = net.sizes[l];
      const std::size_t out_n = net.sizes[l + 1];
      auto& gw = grad.weights[l];
      for (std::size_t o = 0; o < out_n; ++o) {
        const double d = ws.delta[l][o];
        grad.biases[l][o] += d;
        double* gr = gw.data() + o * in;
        for (std::size_t i = 0; i < in; ++i)
          gr[i] += d * ws.a[l][i];
      }
      if (l == 0)
        break;
      const auto& w = net.weights[l];
      for (std::size_t i = 0; i < in; ++i) {
        double s = 0.0;
        for (std::size_t o = 0; o < out_n; ++o)
          s += w[o * in + i] * ws.delta[l][o];
        ws.delta[l - 1][i] = s * activate_grad(net.activation, ws.z[l - 1][i], ws.a[l][i]);
      }
    }
  }
  for (std::size_t l = 0; l < layers; ++l)
    for (std::size_t p = 0; p < net.weights[l].size(); ++p)
      grad.weights[l][p] += alpha * net.weights[l][p];
  return sse * inv_b + 0.5 * alpha * weight_penalty(net);
}

MlpGradient empty_gradient(const MlpNetwork& net) {
  MlpGradient g;
  g.weights.resize(net.layer_count());
  g.biases.resize(net.layer_count());
  return g;
}

} // namespace

MlpNetwork MlpNetwork::init(std::span<const std::uint32_t> sizes, Activation act,
                            std::uint64_t seed) {
  MlpNetwork net;
  net.sizes.assign(sizes.begin(), sizes.end());
  net.activation = act;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    const double fan_in = net.sizes[l];
    const bool hidden = l + 2 < net.sizes.size();
    const double bound =
        std::sqrt((hidden && act == Activation::relu ? 6.0 : 3.0) / fan_in);
    std::vector<double> w(static_cast<std::size_t>(net.sizes[l + 1]) * net.sizes[l]);
    for (auto& v : w)
      v = rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(net.sizes[l + 1], 0.0);
  }
  return net;
}

double MlpNetwork::forward(std::span<const double> x) const {
  Workspace ws(*this);
  return forward_into(*this, x, ws);
}

MlpGradient mlp_loss_gradient(const MlpNetwork& net, std::span<const double> x,
                              std::span<const double> y, double alpha) {
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Workspace ws(net);
  MlpGradient g = empty_gradient(net);
  g.loss = accumulate_gradient(net, x, y, rows, alpha, ws, g);
  return g;
}

double mlp_loss(const MlpNetwork& net, std::span<const double> x, std::span<const double> y,
                double alpha) {
  const std::size_t k = net.sizes[0];
  Workspace ws(net);
  double sse = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double err = forward_into(net, x.subspan(r * k, k), ws) - y[r];
    sse += err * err;
  }
  return sse / static_cast<double>(y.size()) + 0.5 * alpha * weight_penalty(net);
}

MlpModel MlpModel::fit(const dataset::FeatureMatrix& train, const MlpParams& hp) {
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "cannot fit MLP on zero rows");
  const std::size_t n = train.rows();
  const std::size_t k = train.k();

  MlpModel m;
  m.x_scaler = Standardizer::fit(train);
  const std::vector<double> x = m.x_scaler.apply_all(train);
  const auto& labels = train.labels();
  m.y_mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : labels)
    ss += (v - m.y_mean) * (v - m.y_mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  m.y_scale = sd > 1e-12 ? sd : 1.0;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = (labels[i] - m.y_mean) / m.y_scale;

  const std::array<std::uint32_t, 5> sizes{static_cast<std::uint32_t>(k), hp.layers[0],
                                           hp.layers[1], hp.layers[2], 1};
  m.net = MlpNetwork::init(sizes, hp.activation, derive_seed(hp.seed, 0));

  const std::size_t n_val = n >= 10 ? std::max<std::size_t>(1, n / 10) : 0;
  const std::size_t n_fit = n - n_val;
  std::vector<std::size_t> order(n_fit);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> val_rows(n_val);
  std::iota(val_rows.begin(), val_rows.end(), n_fit);

  const std::size_t layers = m.net.layer_count();
  std::vector<std::vector<double>> mw(layers), vw(layers), mb(layers), vb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    mw[l].assign(m.net.weights[l].size(), 0.0);
    vw[l].assign(m.net.weights[l].size(), 0.0);
    mb[l].assign(m.net.biases[l].size(), 0.0);
    vb[l].assign(m.net.biases[l].size(), 0.0);
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  auto adam = [&](std::vector<double>& p, std::vector<double>& mom, std::vector<double>& vel,
                  const std::vector<double>& g, double step) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      mom[i] = beta1 * mom[i] + (1.0 - beta1) * g[i];
      vel[i] = beta2 * vel[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] -= step * mom[i] / (std::sqrt(vel[i]) + eps);
    }
  };

  auto val_mse = [&] {
    double sse = 0.0;
    for (std::size_t r : val_rows) {
      const double err = m.net.forward(std::span<const double>(x).subspan(r * k, k)) - y[r];
      sse += err * err;
    }
    return sse / static_cast<double>(n_val);
  };

  Rng rng(derive_seed(hp.seed, 1));
  Workspace ws(m.net);
  MlpGradient grad = empty_gradient(m.net);
  const std::size_t batch = std::min<std::size_t>(hp.batch, n_fit);
  MlpNetwork best = m.net;
  double best_val = std::numeric_limits<double>::infinity();
  std::uint32_t stall = 0;
  for (std::uint32_t epoch = 0; epoch < hp.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n_fit; start += batch) {
      const std::size_t end = std::min(n_fit, start + batch);
      accumulate_gradient(m.net, x, y,
                          std::span<const std::size_t>(order.data() + start, end - start),
                          hp.alpha, ws, grad);
      beta1_t *= beta1;
      beta2_t *= beta2;
      const double step = hp.lr * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
      for (std::size_t l = 0; l < layers; ++l) {
        adam(m.net.weights[l], mw[l], vw[l], grad.weights[l], step);
        adam(m.net.biases[l], mb[l], vb[l], grad.biases[l], step);
      }
    }
    if (n_val == 0)
      continue;
    const double v = val_mse();
    if (v < best_val - 1e-7) {
      best_val = v;
      best = m.net;
      stall = 0;
    } else if (++stall >= hp.patience) {
      break;
    }
  }
  if (n_val > 0)
    m.net = std::move(best);
  return m;
}

double MlpModel::predict(std::span<const double> x) const {
  std::vector<double> z(x.size());
  x_scaler.apply(x, z);
  return net.forward(z) * y_scale + y_mean;
}

} // namespace pulsehr::models
