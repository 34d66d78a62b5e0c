#include "pulsehr/models/standardize.hpp"

#include <cmath>

namespace pulsehr::models {

Standardizer Standardizer::fit(const dataset::FeatureMatrix& data) {
  const std::size_t k = data.k();
  const std::size_t n = data.rows();
  Standardizer s{std::vector<double>(k, 0.0), std::vector<double>(k, 1.0)};
  if (n == 0)
    return s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f)
      s.mean[f] += data.row(i)[f];
  for (auto& m : s.mean)
    m /= static_cast<double>(n);
  std::vector<double> ss(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) {
      const double d = data.row(i)[f] - s.mean[f];
      ss[f] += d * d;
    }
  for (std::size_t f = 0; f < k; ++f) {
    const double sd = std::sqrt(ss[f] / static_cast<double>(n));
    s.scale[f] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply_all(const dataset::FeatureMatrix& data) const {
  const std::size_t k = data.k();
  std::vector<double> out(data.rows() * k);
  for (std::size_t i = 0; i < data.rows(); ++i)
    apply(data.row(i), std::span<double>(out.data() + i * k, k));
  return out;
}

} // namespace pulsehr::models
