#pragma once

#include "pulsehr/signal_model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pulsehr::dataset {

/// Rows of k lagged PPG-HR readings (oldest first) with the ground-truth HR
/// at the time of the newest feature as label. Row-major storage.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t k) : k_(k) {}

  std::size_t k() const noexcept { return k_; }
  std::size_t rows() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * k_, k_};
  }
  double label(std::size_t i) const { return labels_[i]; }
  double time(std::size_t i) const { return times_[i]; }

  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& features() const noexcept { return features_; }

  void add_row(std::span<const double> features, double label, double time);
  /// Rows at the given indices, in the given order.
  FeatureMatrix subset(std::span<const std::size_t> indices) const;
  /// Rows [begin, end).
  FeatureMatrix slice(std::size_t begin, std::size_t end) const;

  bool operator==(const FeatureMatrix&) const = default;

private:
  std::size_t k_ = 0;
  std::vector<double> features_;
  std::vector<double> labels_;
  std::vector<double> times_;
};

/// Builds one row per second t where pphr covers [t-k+1, t] and truth has a
/// reading at t. Both series must be 1 Hz on a common integer-second grid.
/// Throws AlignmentError or InsufficientData.
FeatureMatrix build_features(const HrSeries& pphr, const HrSeries& truth, std::size_t k);

enum class SplitMode { chronological, random };

struct SplitSpec {
  double train_fraction = 0.8;
  SplitMode mode = SplitMode::chronological;
  std::uint64_t seed = 0;
};

void validate(const SplitSpec& spec);

/// ceil(train_fraction * n) training rows. Chronological mode takes the
/// leading rows; random mode draws a seeded shuffle. Both halves keep
/// time order. Throws EmptyMatrix.
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& fm, const SplitSpec& spec = {});

std::size_t train_row_count(std::size_t n, double train_fraction);

} // namespace pulsehr::dataset
