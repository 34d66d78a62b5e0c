#pragma once

#include "pulsehr/dataset.hpp"

#include <span>
#include <vector>

namespace pulsehr::models {

/// Per-feature affine scaling to zero mean and unit variance. Constant
/// features keep scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const dataset::FeatureMatrix& data);

  void apply(std::span<const double> x, std::span<double> out) const noexcept {
    for (std::size_t i = 0; i < mean.size(); ++i)
      out[i] = (x[i] - mean[i]) / scale[i];
  }
  /// Whole matrix, row-major.
  std::vector<double> apply_all(const dataset::FeatureMatrix& data) const;

  bool operator==(const Standardizer&) const = default;
};

} // namespace pulsehr::models
