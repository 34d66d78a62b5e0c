#include "pulsehr/models/artifact.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/rng.hpp"
#include "pulsehr/signal_model.hpp"

#include <cmath>
#include <string>

namespace pulsehr::models {

ModelArtifact::ModelArtifact(Hyperparams hp, Payload payload, TrainMeta meta)
    : hp_(std::move(hp)), payload_(std::move(payload)), meta_(meta) {
  if (hp_.index() != payload_.index())
    throw Error(ErrorCode::CorruptPayload, "hyperparameters and payload disagree on model kind");
}

double ModelArtifact::predict_raw(std::span<const double> x) const {
  return std::visit([&](const auto& model) { return model.predict(x); }, payload_);
}

namespace {

TrainMeta meta_for(const dataset::FeatureMatrix& train, std::uint64_t seed) {
  return TrainMeta{static_cast<std::uint32_t>(train.k()), train.rows(), seed, true};
}

void require_rows(const dataset::FeatureMatrix& train, const char* what) {
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, std::string("cannot fit ") + what + " on zero rows");
}

} // namespace

ModelArtifact fit_dt(const dataset::FeatureMatrix& train, const DtParams& hp) {
  validate(hp);
  require_rows(train, "DT");
  return {hp, RegressionTree::fit(train, hp.max_depth), meta_for(train, 0)};
}

ModelArtifact fit_rf(const dataset::FeatureMatrix& train, const RfParams& hp, std::uint64_t seed) {
  validate(hp);
  require_rows(train, "RF");
  const std::size_t n = train.rows();
  ForestModel forest;
  forest.trees.reserve(hp.n_trees);
  std::vector<std::size_t> rows(n);
  for (std::uint32_t t = 0; t < hp.n_trees; ++t) {
    if (hp.bootstrap) {
      Rng rng(derive_seed(seed, t));
      for (auto& r : rows)
        r = rng.index(n);
    } else {
      for (std::size_t i = 0; i < n; ++i)
        rows[i] = i;
    }
    forest.trees.push_back(RegressionTree::fit(train, rows, hp.max_depth));
  }
  return {hp, std::move(forest), meta_for(train, seed)};
}

ModelArtifact fit_knn(const dataset::FeatureMatrix& train, const KnnParams& hp) {
  validate(hp);
  return {hp, KnnModel::fit(train, hp), meta_for(train, 0)};
}

ModelArtifact fit_svr(const dataset::FeatureMatrix& train, const SvrParams& hp) {
  validate(hp);
  SvrDualSolution sol;
  SvrModel model = SvrModel::fit(train, hp, &sol);
  TrainMeta meta = meta_for(train, 0);
  meta.converged = sol.converged || sol.max_violation <= 10.0 * kSvrTolerance;
  return {hp, std::move(model), meta};
}

ModelArtifact fit_mlp(const dataset::FeatureMatrix& train, const MlpParams& hp) {
  validate(hp);
  return {hp, MlpModel::fit(train, hp), meta_for(train, hp.seed)};
}

ModelArtifact fit(const dataset::FeatureMatrix& train, const Hyperparams& hp, std::uint64_t seed) {
  switch (kind_of(hp)) {
  case ModelKind::dt: return fit_dt(train, std::get<DtParams>(hp));
  case ModelKind::rf: return fit_rf(train, std::get<RfParams>(hp), seed);
  case ModelKind::knn: return fit_knn(train, std::get<KnnParams>(hp));
  case ModelKind::svr: return fit_svr(train, std::get<SvrParams>(hp));
  case ModelKind::mlp: return fit_mlp(train, std::get<MlpParams>(hp));
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model kind");
}

double predict(const ModelArtifact& m, std::span<const double> x) {
  if (x.size() != m.k())
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(m.k()) + " features, got " +
                    std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]))
      throw Error(ErrorCode::NonFiniteSample, "feature is not finite", i);
  const double raw = m.predict_raw(x);
  return std::isfinite(raw) ? clamp_hr(raw) : kFallbackHrBpm;
}

} // namespace pulsehr::models
