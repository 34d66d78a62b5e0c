#pragma once

#include "pulsehr/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pulsehr::models {

struct TreeNode {
  std::uint16_t feature = 0;
  double threshold = 0.0;
  bool leaf = true;
  double value = 0.0;
  /// Preorder index of the right child; the left child is always the next
  /// node. Derived from the node list, not serialized.
  std::uint32_t right = 0;

  bool operator==(const TreeNode&) const = default;
};

/// CART regression tree stored as a preorder node list.
///
/// Splits minimise the summed squared error of the two children over every
/// feature and every midpoint between consecutive distinct sorted values.
/// Equal-quality splits go to the lowest feature index, then the lowest
/// threshold. A node becomes a leaf at max_depth, below two samples, or when
/// all of its labels are equal. Samples with x[feature] <= threshold go left.
class RegressionTree {
public:
  RegressionTree() = default;

  /// Fits on the listed rows of `data`; repeated indices act as weights
  /// (bootstrap resamples).
  static RegressionTree fit(const dataset::FeatureMatrix& data,
                            std::span<const std::size_t> sample_rows, std::uint32_t max_depth);
  static RegressionTree fit(const dataset::FeatureMatrix& data, std::uint32_t max_depth);

  /// Rebuilds right-child links from a preorder list; throws CorruptPayload
  /// if the list is not exactly one well-formed tree.
  static RegressionTree from_preorder(std::vector<TreeNode> nodes, std::size_t n_features);

  double predict(std::span<const double> x) const noexcept {
    std::uint32_t i = 0;
    while (!nodes_[i].leaf)
      i = x[nodes_[i].feature] <= nodes_[i].threshold ? i + 1 : nodes_[i].right;
    return nodes_[i].value;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const RegressionTree&) const = default;

private:
  std::vector<TreeNode> nodes_;
};

} // namespace pulsehr::models
