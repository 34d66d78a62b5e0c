#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/hyperparams.hpp"

#include <span>
#include <vector>

namespace pulsehr::models {

double distance(std::span<const double> a, std::span<const double> b, Metric metric) noexcept;

/// Brute-force k-nearest-neighbour regressor over the stored training rows.
/// The prediction is the unweighted mean label of the n_neighbors closest
/// rows; equal distances are ordered by training-row position.
struct KnnModel {
  std::size_t k = 0;
  std::uint32_t n_neighbors = 1;
  Metric metric = Metric::euclidean;
  std::vector<double> rows; // row-major, n x k
  std::vector<double> labels;

  static KnnModel fit(const dataset::FeatureMatrix& train, const KnnParams& hp);

  std::size_t size() const noexcept { return labels.size(); }
  double predict(std::span<const double> x) const;

  bool operator==(const KnnModel&) const = default;
};

} // namespace pulsehr::models
