#include "pulsehr/models/tree.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace pulsehr::models {

namespace {

class TreeBuilder {
public:
  TreeBuilder(const dataset::FeatureMatrix& data, std::span<const std::size_t> rows,
              std::uint32_t max_depth)
      : data_(data), rows_(rows.begin(), rows.end()), k_(data.k()), m_(rows.size()),
        max_depth_(max_depth), sorted_(k_ * m_), go_left_(m_), scratch_(m_) {
    for (std::size_t f = 0; f < k_; ++f) {
      auto* order = sorted_.data() + f * m_;
      std::iota(order, order + m_, std::size_t{0});
      std::stable_sort(order, order + m_, [&](std::size_t a, std::size_t b) {
        return value(a, f) < value(b, f);
      });
    }
  }

  std::vector<TreeNode> build() {
    if (m_ > 0)
      grow(0, m_, 0);
    return std::move(nodes_);
  }

private:
  double value(std::size_t slot, std::size_t f) const { return data_.row(rows_[slot])[f]; }
  double label(std::size_t slot) const { return data_.label(rows_[slot]); }

  void grow(std::size_t begin, std::size_t end, std::uint32_t depth) {
    const std::size_t count = end - begin;
    // Any feature's array holds the node's slots; use feature 0 (or the
    // identity order when there are no features).
    auto slot_at = [&](std::size_t pos) { return k_ > 0 ? sorted_[pos] : pos; };

    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t p = begin; p < end; ++p) {
      const double y = label(slot_at(p));
      sum += y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    const double mean = sum / static_cast<double>(count);

    const std::size_t index = nodes_.size();
    nodes_.push_back(TreeNode{0, 0.0, true, mean, 0});
    if (depth >= max_depth_ || count < 2 || lo == hi || k_ == 0)
      return;

    double total_sq = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      const double c = label(slot_at(p)) - mean;
      total_sq += c * c;
    }
    const double total = sum - mean * static_cast<double>(count);
    const double tol = 1e-12 * total_sq;

    bool found = false;
    double best_gain = -std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    std::size_t best_left = 0;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < k_; ++f) {
      const auto* order = sorted_.data() + f * m_;
      double left = 0.0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        left += label(order[p]) - mean;
        const double a = value(order[p], f);
        const double b = value(order[p + 1], f);
        if (!(a < b))
          continue;
        const double nl = static_cast<double>(p + 1 - begin);
        const double nr = static_cast<double>(end - p - 1);
        const double right = total - left;
        const double gain = left * left / nl + right * right / nr;
        if (!found || gain > best_gain + tol) {
          found = true;
          best_gain = gain;
          best_feature = f;
          best_left = p + 1 - begin;
          double mid = a + (b - a) / 2.0;
          if (!(mid < b))
            mid = a;
          best_threshold = mid;
        }
      }
    }
    if (!found)
      return;

    const auto* chosen = sorted_.data() + best_feature * m_;
    for (std::size_t p = begin; p < end; ++p)
      go_left_[chosen[p]] = p < begin + best_left;
    for (std::size_t f = 0; f < k_; ++f) {
      auto* order = sorted_.data() + f * m_;
      auto* out = scratch_.data();
      std::size_t n_out = 0;
      for (std::size_t p = begin; p < end; ++p)
        if (go_left_[order[p]])
          out[n_out++] = order[p];
      for (std::size_t p = begin; p < end; ++p)
        if (!go_left_[order[p]])
          out[n_out++] = order[p];
      std::copy(out, out + n_out, order + begin);
    }

    nodes_[index].leaf = false;
    nodes_[index].feature = static_cast<std::uint16_t>(best_feature);
    nodes_[index].threshold = best_threshold;
    const std::size_t mid = begin + best_left;
    grow(begin, mid, depth + 1);
    nodes_[index].right = static_cast<std::uint32_t>(nodes_.size());
    grow(mid, end, depth + 1);
  }

  const dataset::FeatureMatrix& data_;
  std::vector<std::size_t> rows_;
  std::size_t k_;
  std::size_t m_;
  std::uint32_t max_depth_;
  std::vector<std::size_t> sorted_;
  std::vector<char> go_left_;
  std::vector<std::size_t> scratch_;
  std::vector<TreeNode> nodes_;
};

} // namespace

RegressionTree RegressionTree::fit(const dataset::FeatureMatrix& data,
                                   std::span<const std::size_t> sample_rows,
                                   std::uint32_t max_depth) {
  if (sample_rows.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "cannot fit a tree on zero rows");
  if (data.k() > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorCode::InvalidConfig, "too many features for a tree");
  RegressionTree tree;
  tree.nodes_ = TreeBuilder(data, sample_rows, max_depth).build();
  return tree;
}

RegressionTree RegressionTree::fit(const dataset::FeatureMatrix& data, std::uint32_t max_depth) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit(data, rows, max_depth);
}

RegressionTree RegressionTree::from_preorder(std::vector<TreeNode> nodes,
                                             std::size_t n_features) {
  if (nodes.empty())
    throw Error(ErrorCode::CorruptPayload, "tree has no nodes");
  // Explicit stack of internal nodes still waiting for their right child.
  std::vector<std::uint32_t> pending;
  std::size_t next = 0;
  while (true) {
    if (next >= nodes.size())
      throw Error(ErrorCode::CorruptPayload, "tree node list ends early");
    auto& node = nodes[next];
    if (!node.leaf) {
      if (node.feature >= n_features)
        throw Error(ErrorCode::CorruptPayload,
                    "split feature " + std::to_string(node.feature) + " out of range");
      pending.push_back(static_cast<std::uint32_t>(next));
      ++next;
      continue;
    }
    ++next;
    if (pending.empty())
      break;
    nodes[pending.back()].right = static_cast<std::uint32_t>(next);
    pending.pop_back();
  }
  if (next != nodes.size())
    throw Error(ErrorCode::CorruptPayload, "trailing nodes after a complete tree");
  RegressionTree tree;
  tree.nodes_ = std::move(nodes);
  return tree;
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes_[i].leaf) {
      stack.emplace_back(i + 1, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

} // namespace pulsehr::models
