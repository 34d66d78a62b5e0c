#include "pulsehr/dataset.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pulsehr::dataset {

void FeatureMatrix::add_row(std::span<const double> features, double label, double time) {
  if (features.size() != k_)
    throw Error(ErrorCode::DimensionMismatch,
                "row has " + std::to_string(features.size()) + " features, expected " +
                    std::to_string(k_));
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
  times_.push_back(time);
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix out(k_);
  out.features_.reserve(indices.size() * k_);
  out.labels_.reserve(indices.size());
  out.times_.reserve(indices.size());
  for (std::size_t i : indices)
    out.add_row(row(i), labels_[i], times_[i]);
  return out;
}

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return subset(idx);
}

namespace {

bool is_one_hz(const HrSeries& s) { return std::abs(s.rate_hz - 1.0) < 1e-9; }

} // namespace

FeatureMatrix build_features(const HrSeries& pphr, const HrSeries& truth, std::size_t k) {
  if (k == 0)
    throw Error(ErrorCode::InvalidConfig, "feature count k must be >= 1");
  if (!is_one_hz(pphr) || !is_one_hz(truth))
    throw Error(ErrorCode::AlignmentError, "both series must be sampled at 1 Hz");
  const double offset = truth.t0_s - pphr.t0_s;
  if (std::abs(offset - std::round(offset)) > 1e-6)
    throw Error(ErrorCode::AlignmentError,
                "series start times are not a whole number of seconds apart");
  if (pphr.values.empty() || truth.values.empty())
    throw Error(ErrorCode::InsufficientData, "empty HR series");

  // Work in pphr index space: truth index j sits at pphr index j + shift.
  const auto shift = static_cast<long long>(std::llround(offset));
  const long long pphr_end = static_cast<long long>(pphr.values.size());
  const long long truth_end = shift + static_cast<long long>(truth.values.size());
  if (std::max(0LL, shift) >= std::min(pphr_end, truth_end))
    throw Error(ErrorCode::AlignmentError, "series do not overlap in time");

  const long long first = std::max(static_cast<long long>(k) - 1, shift);
  const long long last = std::min(pphr_end, truth_end);
  if (first >= last)
    throw Error(ErrorCode::InsufficientData,
                "need at least " + std::to_string(k) + " overlapping seconds");

  FeatureMatrix fm(k);
  for (long long t = first; t < last; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const std::span<const double> window(pphr.values.data() + i + 1 - k, k);
    const double label = truth.values[static_cast<std::size_t>(t - shift)];
    if (!std::isfinite(label) || label < kMinHrBpm || label > kMaxHrBpm)
      throw Error(ErrorCode::HrOutOfRange, "ground-truth HR outside [20, 230]",
                  static_cast<std::size_t>(t - shift));
    fm.add_row(window, label, pphr.time_at(i));
  }
  return fm;
}

void validate(const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "train_fraction must be in (0, 1)");
}

std::size_t train_row_count(std::size_t n, double train_fraction) {
  const double raw = train_fraction * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& fm, const SplitSpec& spec) {
  validate(spec);
  if (fm.empty())
    throw Error(ErrorCode::EmptyMatrix, "cannot split an empty feature matrix");
  const std::size_t n = fm.rows();
  const std::size_t n_train = train_row_count(n, spec.train_fraction);
  if (spec.mode == SplitMode::chronological)
    return {fm.slice(0, n_train), fm.slice(n_train, n)};

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(idx.begin(), idx.end());
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {fm.subset(train), fm.subset(test)};
}

} // namespace pulsehr::dataset
