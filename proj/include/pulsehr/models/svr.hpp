#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/hyperparams.hpp"
#include "pulsehr/models/standardize.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pulsehr::models {

inline constexpr double kSvrTolerance = 1e-3;
inline constexpr std::size_t kSvrMaxIterations = 1'000'000;

struct KernelSpec {
  Kernel kernel = Kernel::rbf;
  double gamma = 1.0;
  double coef0 = 0.0;
  std::uint32_t degree = 3;

  double operator()(std::span<const double> a, std::span<const double> b) const noexcept;
  bool operator==(const KernelSpec&) const = default;
};

/// Raw epsilon-SVR dual solution: alpha[i] pairs with the upper tube edge,
/// alpha_star[i] with the lower one. f(x) = sum (alpha - alpha_star) K + bias.
struct SvrDualSolution {
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  double bias = 0.0;
  std::size_t iterations = 0;
  double max_violation = 0.0;
  bool converged = false;
};

/// Sequential minimal optimisation with second-order working-set selection.
/// `x` is row-major n x k. Stops when the maximal KKT violation drops below
/// `tolerance` or after `max_iterations` updates.
SvrDualSolution solve_svr_dual(std::span<const double> x, std::size_t k,
                               std::span<const double> y, double c, double epsilon,
                               const KernelSpec& kernel, double tolerance = kSvrTolerance,
                               std::size_t max_iterations = kSvrMaxIterations);

/// Epsilon-SVR on standardized features. Only support vectors (non-zero
/// dual coefficients) are kept.
struct SvrModel {
  KernelSpec kernel;
  std::size_t k = 0;
  std::vector<double> support; // row-major, standardized space
  std::vector<double> coef;    // alpha - alpha_star per support vector
  double bias = 0.0;
  Standardizer standardizer;

  static SvrModel fit(const dataset::FeatureMatrix& train, const SvrParams& hp,
                      SvrDualSolution* solution = nullptr);

  std::size_t support_count() const noexcept { return coef.size(); }
  double predict(std::span<const double> x) const;

  bool operator==(const SvrModel&) const = default;
};

/// gamma = 1 / (k * var(x)) over all entries of the standardized matrix.
double scale_gamma(std::span<const double> x_std, std::size_t k);

} // namespace pulsehr::models
