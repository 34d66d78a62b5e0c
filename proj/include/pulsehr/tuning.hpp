#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace pulsehr::tuning {

struct SearchSpec {
  models::ModelKind kind = models::ModelKind::dt;
  std::size_t n_iter = 20;
  std::size_t n_folds = 5;
  std::uint64_t seed = 42;
  /// Worker threads for trials; 0 picks the hardware concurrency.
  std::size_t threads = 1;
};

void validate(const SearchSpec& spec);

/// One draw from the search space of `kind`. Integer fields are uniform over
/// their range, C and alpha log-uniform over [1e-5, 10], categorical fields
/// uniform. SVR epsilon, gamma mode and degree keep their defaults; the MLP
/// initialisation seed is drawn from `rng`.
models::Hyperparams sample_hyperparams(models::ModelKind kind, Rng& rng);

struct Trial {
  models::Hyperparams hyperparams;
  /// Seed handed to models::fit (drives RF resampling).
  std::uint64_t fit_seed = 0;
  std::vector<double> fold_mape;
  double mean_mape = 0.0;
  /// Sample standard deviation over folds.
  double sd_mape = 0.0;
};

struct SearchReport {
  std::vector<Trial> trials;
  std::size_t best = 0;
  models::ModelArtifact model;
};

/// Fold f covers rows [f*n/F, (f+1)*n/F).
std::vector<std::pair<std::size_t, std::size_t>> fold_bounds(std::size_t n_rows,
                                                             std::size_t n_folds);

/// Trains on every block but `fold` and returns MAPE on `fold`. A fit that
/// throws scores +inf.
double score_fold(const dataset::FeatureMatrix& train, const models::Hyperparams& hp,
                  std::uint64_t fit_seed, std::size_t n_folds, std::size_t fold);

/// Contiguous-block cross-validated random search, then a refit of the best
/// trial on all of `train`. Throws InsufficientData when
/// rows < n_folds * (k + 2).
SearchReport random_search(const dataset::FeatureMatrix& train, const SearchSpec& spec);

/// Field-by-field form of a hyperparameter set, including "kind".
nlohmann::json to_json(const models::Hyperparams& hp);
/// Per-trial scores plus the winner and its refit size. Non-finite scores
/// (failed trials) are written as null.
nlohmann::json to_json(const SearchReport& report);

} // namespace pulsehr::tuning
