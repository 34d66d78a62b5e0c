#include "pulsehr/models/knn.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pulsehr::models {

double distance(std::span<const double> a, std::span<const double> b, Metric metric) noexcept {
  double acc = 0.0;
  if (metric == Metric::manhattan) {
    for (std::size_t i = 0; i < a.size(); ++i)
      acc += std::abs(a[i] - b[i]);
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

KnnModel KnnModel::fit(const dataset::FeatureMatrix& train, const KnnParams& hp) {
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "cannot fit KNN on zero rows");
  if (train.rows() < hp.n_neighbors)
    throw Error(ErrorCode::NotEnoughRows,
                "KNN needs at least n_neighbors=" + std::to_string(hp.n_neighbors) +
                    " rows, got " + std::to_string(train.rows()));
  KnnModel m;
  m.k = train.k();
  m.n_neighbors = hp.n_neighbors;
  m.metric = hp.metric;
  m.rows = train.features();
  m.labels = train.labels();
  return m;
}

double KnnModel::predict(std::span<const double> x) const {
  const std::size_t n = labels.size();
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i)
    dist[i] = distance(x, std::span<const double>(rows.data() + i * k, k), metric);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  const std::size_t take = std::min<std::size_t>(n_neighbors, n);
  auto cut = idx.begin() + static_cast<std::ptrdiff_t>(take);
  std::nth_element(idx.begin(), cut - 1, idx.end(), closer);
  std::sort(idx.begin(), cut, closer);
  double sum = 0.0;
  for (auto it = idx.begin(); it != cut; ++it)
    sum += labels[*it];
  return sum / static_cast<double>(take);
}

} // namespace pulsehr::models
