#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/hyperparams.hpp"
#include "pulsehr/models/knn.hpp"
#include "pulsehr/models/mlp.hpp"
#include "pulsehr/models/svr.hpp"
#include "pulsehr/models/tree.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace pulsehr::models {

struct ForestModel {
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const noexcept {
    double sum = 0.0;
    for (const auto& t : trees)
      sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
  }
  bool operator==(const ForestModel&) const = default;
};

/// Alternative index matches ModelKind.
using Payload = std::variant<RegressionTree, ForestModel, KnnModel, SvrModel, MlpModel>;

struct TrainMeta {
  std::uint32_t k = 0;
  std::uint64_t n_rows = 0;
  std::uint64_t seed = 0;
  /// False when the SVR solver hit its iteration cap with a KKT violation
  /// above ten times the tolerance.
  bool converged = true;

  bool operator==(const TrainMeta&) const = default;
};

/// A trained regressor together with its hyperparameters. Immutable once
/// built; predict() is safe to call concurrently.
class ModelArtifact {
public:
  ModelArtifact(Hyperparams hp, Payload payload, TrainMeta meta);

  ModelKind kind() const noexcept { return kind_of(hp_); }
  const Hyperparams& hyperparams() const noexcept { return hp_; }
  const Payload& payload() const noexcept { return payload_; }
  const TrainMeta& meta() const noexcept { return meta_; }
  std::size_t k() const noexcept { return meta_.k; }

  /// Raw model output without the range clamp or dimension check.
  double predict_raw(std::span<const double> x) const;

  bool operator==(const ModelArtifact&) const = default;

private:
  Hyperparams hp_;
  Payload payload_;
  TrainMeta meta_;
};

ModelArtifact fit_dt(const dataset::FeatureMatrix& train, const DtParams& hp);
/// Each tree t is grown on a bootstrap resample drawn from derive_seed(seed, t).
ModelArtifact fit_rf(const dataset::FeatureMatrix& train, const RfParams& hp, std::uint64_t seed);
ModelArtifact fit_knn(const dataset::FeatureMatrix& train, const KnnParams& hp);
ModelArtifact fit_svr(const dataset::FeatureMatrix& train, const SvrParams& hp);
ModelArtifact fit_mlp(const dataset::FeatureMatrix& train, const MlpParams& hp);

/// Dispatches on the hyperparameter kind. `seed` drives RF resampling; the
/// MLP uses its own hp.seed.
ModelArtifact fit(const dataset::FeatureMatrix& train, const Hyperparams& hp,
                  std::uint64_t seed = 0);

/// Validated prediction clamped to [20, 230] bpm. Throws DimensionMismatch.
double predict(const ModelArtifact& m, std::span<const double> x);

/// Canonical little-endian binary form ("PHRM" v1).
std::vector<std::uint8_t> serialize(const ModelArtifact& m);
/// Throws BadMagic, UnsupportedVersion, TruncatedPayload or CorruptPayload.
ModelArtifact deserialize(std::span<const std::uint8_t> bytes);
std::size_t model_size(const ModelArtifact& m);

inline constexpr std::uint8_t kModelFormatVersion = 1;

} // namespace pulsehr::models
