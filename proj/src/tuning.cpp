#include "pulsehr/tuning.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace pulsehr::tuning {

using models::ModelKind;

namespace {

constexpr double kLogLow = 1e-5;
constexpr double kLogHigh = 10.0;

std::uint32_t draw(Rng& rng, std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint32_t>(rng.uniform_int(lo, hi));
}

bool coin(Rng& rng) { return rng.uniform_int(0, 1) == 1; }

} // namespace

void validate(const SearchSpec& spec) {
  if (spec.n_iter < 1)
    throw Error(ErrorCode::InvalidConfig, "n_iter must be >= 1");
  if (spec.n_folds < 2)
    throw Error(ErrorCode::InvalidConfig, "n_folds must be >= 2");
}

models::Hyperparams sample_hyperparams(ModelKind kind, Rng& rng) {
  switch (kind) {
  case ModelKind::dt: return models::DtParams{draw(rng, 1, 20)};
  case ModelKind::rf: {
    models::RfParams p;
    p.n_trees = draw(rng, 1, 30);
    p.max_depth = draw(rng, 3, 7);
    p.bootstrap = coin(rng);
    return p;
  }
  case ModelKind::knn: {
    models::KnnParams p;
    p.n_neighbors = draw(rng, 1, 30);
    p.metric = coin(rng) ? models::Metric::euclidean : models::Metric::manhattan;
    return p;
  }
  case ModelKind::svr: {
    models::SvrParams p;
    p.kernel = static_cast<models::Kernel>(rng.uniform_int(0, 2));
    p.c = rng.log_uniform(kLogLow, kLogHigh);
    return p;
  }
  case ModelKind::mlp: {
    models::MlpParams p;
    for (auto& h : p.layers)
      h = draw(rng, 2, 15);
    p.activation = coin(rng) ? models::Activation::tanh : models::Activation::relu;
    p.alpha = rng.log_uniform(kLogLow, kLogHigh);
    p.seed = rng.next_u64();
    return p;
  }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model kind");
}

std::vector<std::pair<std::size_t, std::size_t>> fold_bounds(std::size_t n, std::size_t n_folds) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(n_folds);
  for (std::size_t f = 0; f < n_folds; ++f)
    out.emplace_back(f * n / n_folds, (f + 1) * n / n_folds);
  return out;
}

double score_fold(const dataset::FeatureMatrix& train, const models::Hyperparams& hp,
                  std::uint64_t fit_seed, std::size_t n_folds, std::size_t fold) {
  const auto [lo, hi] = fold_bounds(train.rows(), n_folds)[fold];
  std::vector<std::size_t> fit_rows;
  fit_rows.reserve(train.rows() - (hi - lo));
  for (std::size_t i = 0; i < train.rows(); ++i)
    if (i < lo || i >= hi)
      fit_rows.push_back(i);
  try {
    const auto model = models::fit(train.subset(fit_rows), hp, fit_seed);
    std::vector<double> pred, truth;
    for (std::size_t i = lo; i < hi; ++i) {
      pred.push_back(models::predict(model, train.row(i)));
      truth.push_back(train.label(i));
    }
    return eval::mape(pred, truth);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace {

Trial run_trial(const dataset::FeatureMatrix& train, const SearchSpec& spec, std::size_t t) {
  const std::uint64_t trial_seed = derive_seed(spec.seed, t);
  Rng rng(trial_seed);
  Trial trial{sample_hyperparams(spec.kind, rng), derive_seed(trial_seed, 1), {}, 0.0, 0.0};
  for (std::size_t f = 0; f < spec.n_folds; ++f)
    trial.fold_mape.push_back(score_fold(train, trial.hyperparams, trial.fit_seed, spec.n_folds, f));
  trial.mean_mape = std::accumulate(trial.fold_mape.begin(), trial.fold_mape.end(), 0.0) /
                    static_cast<double>(spec.n_folds);
  trial.sd_mape = std::isfinite(trial.mean_mape) ? eval::sample_sd(trial.fold_mape)
                                                 : std::numeric_limits<double>::infinity();
  return trial;
}

} // namespace

SearchReport random_search(const dataset::FeatureMatrix& train, const SearchSpec& spec) {
  validate(spec);
  const std::size_t need = spec.n_folds * (train.k() + 2);
  if (train.rows() < need)
    throw Error(ErrorCode::InsufficientData,
                "random search with " + std::to_string(spec.n_folds) + " folds at k=" +
                    std::to_string(train.k()) + " needs " + std::to_string(need) +
                    " rows, have " + std::to_string(train.rows()));

  std::vector<Trial> trials(spec.n_iter);
  std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, spec.n_iter);
  if (threads == 1) {
    for (std::size_t t = 0; t < spec.n_iter; ++t)
      trials[t] = run_trial(train, spec, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < spec.n_iter;)
          trials[t] = run_trial(train, spec, t);
      });
  }

  const double best_score =
      std::min_element(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
        return a.mean_mape < b.mean_mape;
      })->mean_mape;

  std::optional<models::ModelArtifact> best_model;
  std::size_t best = 0;
  std::size_t best_size = 0;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    if (trials[t].mean_mape != best_score)
      continue;
    auto m = models::fit(train, trials[t].hyperparams, trials[t].fit_seed);
    const std::size_t size = models::model_size(m);
    if (!best_model || size < best_size) {
      best_model.emplace(std::move(m));
      best = t;
      best_size = size;
    }
  }
  return SearchReport{std::move(trials), best, std::move(*best_model)};
}

} // namespace pulsehr::tuning

namespace pulsehr::tuning {

nlohmann::json to_json(const models::Hyperparams& hp) {
  nlohmann::json j;
  j["kind"] = std::string(models::to_string(models::kind_of(hp)));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, models::DtParams>) {
          j["max_depth"] = p.max_depth;
        } else if constexpr (std::is_same_v<T, models::RfParams>) {
          j["n_trees"] = p.n_trees;
          j["max_depth"] = p.max_depth;
          j["bootstrap"] = p.bootstrap;
        } else if constexpr (std::is_same_v<T, models::KnnParams>) {
          j["n_neighbors"] = p.n_neighbors;
          j["metric"] = std::string(models::to_string(p.metric));
        } else if constexpr (std::is_same_v<T, models::SvrParams>) {
          j["kernel"] = std::string(models::to_string(p.kernel));
          j["c"] = p.c;
          j["epsilon_bpm"] = p.epsilon_bpm;
          j["gamma_mode"] = p.gamma_mode == models::GammaMode::scale ? "scale" : "fixed";
          j["gamma"] = p.gamma;
          j["degree"] = p.degree;
          j["coef0"] = p.coef0;
        } else {
          j["layers"] = p.layers;
          j["activation"] = std::string(models::to_string(p.activation));
          j["alpha"] = p.alpha;
          j["lr"] = p.lr;
          j["batch"] = p.batch;
          j["max_epochs"] = p.max_epochs;
          j["patience"] = p.patience;
          j["seed"] = p.seed;
        }
      },
      hp);
  return j;
}

nlohmann::json to_json(const SearchReport& report) {
  const auto score = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    nlohmann::json folds = nlohmann::json::array();
    for (double f : t.fold_mape)
      folds.push_back(score(f));
    trials.push_back({{"hyperparams", to_json(t.hyperparams)},
                      {"fit_seed", t.fit_seed},
                      {"mean_cv_mape_pct", score(t.mean_mape)},
                      {"sd_cv_mape_pct", score(t.sd_mape)},
                      {"fold_mape_pct", folds}});
  }
  return {{"kind", std::string(models::to_string(report.model.kind()))},
          {"best_trial", report.best},
          {"best_mean_cv_mape_pct", score(report.trials[report.best].mean_mape)},
          {"best_hyperparams", to_json(report.model.hyperparams())},
          {"model_size_bytes", models::model_size(report.model)},
          {"trials", trials}};
}

} // namespace pulsehr::tuning
