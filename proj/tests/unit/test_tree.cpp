#include "oracles.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/rng.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pulsehr;
using namespace pulsehr::models;
using dataset::FeatureMatrix;

namespace {

FeatureMatrix random_matrix(Rng& rng, std::size_t n, std::size_t k, bool integer_features) {
  FeatureMatrix fm(k);
  std::vector<double> x(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x)
      v = integer_features ? static_cast<double>(rng.uniform_int(0, 5)) : rng.uniform(50, 150);
    const double y = 60.0 + 30.0 * std::sin(x[0] / 10.0) + (k > 1 ? x[1] / 4.0 : 0.0) +
                     rng.normal(0.0, 3.0);
    fm.add_row(x, std::clamp(y, 20.0, 230.0), static_cast<double>(i));
  }
  return fm;
}

double train_sse(const RegressionTree& t, const FeatureMatrix& fm) {
  double s = 0.0;
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    const double e = t.predict(fm.row(i)) - fm.label(i);
    s += e * e;
  }
  return s;
}

} // namespace

TEST_CASE("constant labels give a single leaf") {
  const auto fm = oracle::matrix({{1, 2}, {3, 4}, {5, 6}}, {72, 72, 72});
  const auto t = RegressionTree::fit(fm, 10);
  REQUIRE(t.nodes().size() == 1);
  CHECK(t.nodes()[0].leaf);
  const std::vector<double> q{100, -3};
  CHECK(t.predict(q) == 72.0);
}

TEST_CASE("depth 1 is a stump") {
  Rng rng(1);
  const auto fm = random_matrix(rng, 50, 3, false);
  const auto t = RegressionTree::fit(fm, 1);
  CHECK(t.nodes().size() == 3);
  CHECK(t.depth() == 1);
  CHECK(t.leaf_count() == 2);
}

TEST_CASE("stump equals the exhaustive best single split") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(19);
    const auto fm = random_matrix(rng, n, 2, trial % 2 == 0);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto best = oracle::best_stump(fm, all);
    const auto t = RegressionTree::fit(fm, 1);
    REQUIRE(train_sse(t, fm) == doctest::Approx(best.sse).epsilon(1e-9));
    if (best.split) {
      REQUIRE(t.nodes()[0].feature == best.feature);
      REQUIRE(t.nodes()[0].threshold == best.threshold);
    }
  }
}

TEST_CASE("depth 2 equals exhaustive greedy enumeration and bounds the optimum") {
  Rng rng(6);
  int optimal_hits = 0;
  const int trials = 300;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 2 + rng.index(19);
    const auto fm = random_matrix(rng, n, 2, trial % 2 == 0);
    const double got = train_sse(RegressionTree::fit(fm, 2), fm);
    const double greedy = oracle::greedy_depth2_sse(fm);
    const double best = oracle::optimal_depth2_sse(fm);
    REQUIRE(got == doctest::Approx(greedy).epsilon(1e-9));
    REQUIRE(got >= best - 1e-9 * (1.0 + best));
    optimal_hits += got <= best + 1e-9 * (1.0 + best);
  }
  MESSAGE("greedy depth-2 tree was globally optimal in " << optimal_hits << "/" << trials);
}

TEST_CASE("tree predictions stay within the training label range") {
  Rng rng(8);
  const auto fm = random_matrix(rng, 300, 4, false);
  const auto [lo, hi] = std::minmax_element(fm.labels().begin(), fm.labels().end());
  const auto dt = fit_dt(fm, DtParams{12});
  const auto rf = fit_rf(fm, RfParams{15, 5, true}, 3);
  for (int q = 0; q < 500; ++q) {
    std::vector<double> x(4);
    for (auto& v : x)
      v = rng.uniform(0, 200);
    for (const auto* m : {&dt, &rf}) {
      const double p = m->predict_raw(x);
      CHECK(p >= *lo);
      CHECK(p <= *hi);
    }
  }
}

TEST_CASE("one tree without bootstrap is the plain tree") {
  Rng rng(9);
  for (std::uint32_t depth : {3u, 5u, 7u}) {
    const auto fm = random_matrix(rng, 200, 3, false);
    const auto dt = fit_dt(fm, DtParams{depth});
    const auto rf = fit_rf(fm, RfParams{1, depth, false}, 77);
    CHECK(std::get<ForestModel>(rf.payload()).trees[0] == std::get<RegressionTree>(dt.payload()));
    for (std::size_t i = 0; i < fm.rows(); ++i)
      CHECK(rf.predict_raw(fm.row(i)) == dt.predict_raw(fm.row(i)));
  }
}

TEST_CASE("forest output lies between its members and is seed-deterministic") {
  Rng rng(10);
  const auto fm = random_matrix(rng, 200, 3, false);
  const auto a = fit_rf(fm, RfParams{12, 6, true}, 5);
  const auto b = fit_rf(fm, RfParams{12, 6, true}, 5);
  const auto c = fit_rf(fm, RfParams{12, 6, true}, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const auto& forest = std::get<ForestModel>(a.payload());
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    double lo = 1e9, hi = -1e9;
    for (const auto& t : forest.trees) {
      lo = std::min(lo, t.predict(fm.row(i)));
      hi = std::max(hi, t.predict(fm.row(i)));
    }
    const double p = a.predict_raw(fm.row(i));
    CHECK(p >= lo - 1e-9);
    CHECK(p <= hi + 1e-9);
  }
}

TEST_CASE("depth limit and stopping rules") {
  Rng rng(11);
  const auto fm = random_matrix(rng, 400, 2, false);
  for (std::uint32_t d = 1; d <= 20; ++d)
    CHECK(RegressionTree::fit(fm, d).depth() <= d);
  const auto one = oracle::matrix({{5.0}}, {80});
  CHECK(RegressionTree::fit(one, 5).nodes().size() == 1);
}

TEST_CASE("preorder reconstruction rejects malformed lists") {
  Rng rng(12);
  const auto fm = random_matrix(rng, 100, 2, false);
  const auto t = RegressionTree::fit(fm, 4);
  CHECK(RegressionTree::from_preorder(t.nodes(), 2) == t);
  auto cut = t.nodes();
  cut.pop_back();
  CHECK_THROWS_AS(RegressionTree::from_preorder(cut, 2), Error);
  auto extra = t.nodes();
  extra.push_back(TreeNode{});
  CHECK_THROWS_AS(RegressionTree::from_preorder(extra, 2), Error);
  auto bad_feature = t.nodes();
  bad_feature[0].feature = 2;
  CHECK_THROWS_AS(RegressionTree::from_preorder(bad_feature, 2), Error);
  CHECK_THROWS_AS(RegressionTree::from_preorder({}, 2), Error);
}

TEST_CASE("empty training sets are rejected") {
  const FeatureMatrix empty(3);
  CHECK_THROWS_AS(fit_dt(empty, DtParams{}), Error);
  CHECK_THROWS_AS(fit_rf(empty, RfParams{}, 1), Error);
}
