#include "pulsehr/models/svr.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace pulsehr::models {

double KernelSpec::operator()(std::span<const double> a,
                              std::span<const double> b) const noexcept {
  switch (kernel) {
  case Kernel::rbf: {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      d2 += d * d;
    }
    return std::exp(-gamma * d2);
  }
  case Kernel::sigmoid: {
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    return std::tanh(gamma * dot + coef0);
  }
  case Kernel::polynomial: {
    const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    const double base = gamma * dot + coef0;
    double out = 1.0;
    for (std::uint32_t i = 0; i < degree; ++i)
      out *= base;
    return out;
  }
  }
  return 0.0;
}

double scale_gamma(std::span<const double> x_std, std::size_t k) {
  if (x_std.empty() || k == 0)
    return 1.0;
  const double n = static_cast<double>(x_std.size());
  const double mean = std::accumulate(x_std.begin(), x_std.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x_std)
    ss += (v - mean) * (v - mean);
  const double var = ss / n;
  return var > 0.0 ? 1.0 / (static_cast<double>(k) * var) : 1.0;
}

namespace {

/// Least-recently-used cache of kernel rows K(i, .) over the n training rows.
class KernelCache {
public:
  KernelCache(std::span<const double> x, std::size_t k, const KernelSpec& kernel,
              std::size_t budget_bytes)
      : x_(x), k_(k), n_(k ? x.size() / k : 0), kernel_(kernel),
        capacity_(std::max<std::size_t>(2, budget_bytes / (std::max<std::size_t>(n_, 1) * sizeof(float)))) {
    diag_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i)
      diag_[i] = kernel_(point(i), point(i));
  }

  double diag(std::size_t i) const { return diag_[i]; }

  const float* row(std::size_t i) {
    ++clock_;
    if (auto it = where_.find(i); it != where_.end()) {
      stamp_[it->second] = clock_;
      return rows_[it->second].data();
    }
    std::size_t slot;
    if (rows_.size() < capacity_) {
      slot = rows_.size();
      rows_.emplace_back(n_);
      owner_.push_back(i);
      stamp_.push_back(clock_);
    } else {
      slot = static_cast<std::size_t>(
          std::min_element(stamp_.begin(), stamp_.end()) - stamp_.begin());
      where_.erase(owner_[slot]);
      owner_[slot] = i;
      stamp_[slot] = clock_;
    }
    where_[i] = slot;
    auto& r = rows_[slot];
    const auto xi = point(i);
    for (std::size_t j = 0; j < n_; ++j)
      r[j] = static_cast<float>(kernel_(xi, point(j)));
    return r.data();
  }

private:
  std::span<const double> point(std::size_t i) const { return x_.subspan(i * k_, k_); }

  std::span<const double> x_;
  std::size_t k_;
  std::size_t n_;
  KernelSpec kernel_;
  std::size_t capacity_;
  std::vector<double> diag_;
  std::vector<std::vector<float>> rows_;
  std::vector<std::size_t> owner_;
  std::vector<std::uint64_t> stamp_;
  std::unordered_map<std::size_t, std::size_t> where_;
  std::uint64_t clock_ = 0;
};

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

} // namespace

SvrDualSolution solve_svr_dual(std::span<const double> x, std::size_t k,
                               std::span<const double> y, double c, double epsilon,
                               const KernelSpec& kernel, double tolerance,
                               std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (n == 0)
    throw Error(ErrorCode::EmptyTrainingSet, "cannot fit SVR on zero rows");
  const std::size_t l = 2 * n;
  KernelCache cache(x, k, kernel, kCacheBytes);

  // Variable t < n is alpha[t] (sign +1); t >= n is alpha_star[t - n] (sign -1).
  std::vector<double> a(l, 0.0);
  std::vector<double> grad(l);
  std::vector<signed char> sign(l);
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = epsilon - y[i];
    sign[i] = 1;
    grad[i + n] = epsilon + y[i];
    sign[i + n] = -1;
  }
  auto orig = [n](std::size_t t) { return t < n ? t : t - n; };

  SvrDualSolution sol;
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t iter = 0;
  for (;; ++iter) {
    double gmax = -inf;
    std::size_t i = l;
    for (std::size_t t = 0; t < l; ++t) {
      if (sign[t] > 0) {
        if (a[t] < c && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else if (a[t] > 0.0 && grad[t] >= gmax) {
        gmax = grad[t];
        i = t;
      }
    }
    double gmax2 = -inf;
    std::size_t j = l;
    double best_obj = inf;
    const float* ki = i < l ? cache.row(orig(i)) : nullptr;
    for (std::size_t t = 0; t < l; ++t) {
      double diff;
      if (sign[t] > 0) {
        if (!(a[t] > 0.0))
          continue;
        gmax2 = std::max(gmax2, grad[t]);
        diff = gmax + grad[t];
      } else {
        if (!(a[t] < c))
          continue;
        gmax2 = std::max(gmax2, -grad[t]);
        diff = gmax - grad[t];
      }
      if (diff > 0.0 && ki) {
        double quad = cache.diag(orig(i)) + cache.diag(orig(t)) - 2.0 * ki[orig(t)];
        if (quad <= 0.0)
          quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    sol.max_violation = std::max(0.0, gmax + gmax2);
    if (gmax + gmax2 < tolerance || j == l) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iterations)
      break;

    const float* kj = cache.row(orig(j));
    ki = cache.row(orig(i));
    const double kij = ki[orig(j)];
    const double old_ai = a[i];
    const double old_aj = a[j];
    if (sign[i] != sign[j]) {
      double quad = cache.diag(orig(i)) + cache.diag(orig(j)) - 2.0 * kij;
      if (quad <= 0.0)
        quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = cache.diag(orig(i)) + cache.diag(orig(j)) - 2.0 * kij;
      if (quad <= 0.0)
        quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }

    const double di = a[i] - old_ai;
    const double dj = a[j] - old_aj;
    const double si = sign[i] * di;
    const double sj = sign[j] * dj;
    for (std::size_t t = 0; t < l; ++t) {
      const std::size_t o = orig(t);
      grad[t] += sign[t] * (si * ki[o] + sj * kj[o]);
    }
  }
  sol.iterations = iter;

  // Bias from free variables, else the midpoint of the feasible interval.
  double ub = inf;
  double lb = -inf;
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < l; ++t) {
    const double yg = sign[t] * grad[t];
    if (a[t] >= c) {
      if (sign[t] < 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (sign[t] > 0)
        ub = std::min(ub, yg);
      else
        lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  sol.bias = -rho;
  sol.alpha.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n));
  sol.alpha_star.assign(a.begin() + static_cast<std::ptrdiff_t>(n), a.end());
  return sol;
}

SvrModel SvrModel::fit(const dataset::FeatureMatrix& train, const SvrParams& hp,
                       SvrDualSolution* solution) {
  if (train.empty())
    throw Error(ErrorCode::EmptyTrainingSet, "cannot fit SVR on zero rows");
  SvrModel m;
  m.k = train.k();
  m.standardizer = Standardizer::fit(train);
  const std::vector<double> x = m.standardizer.apply_all(train);
  m.kernel.kernel = hp.kernel;
  m.kernel.gamma = hp.gamma_mode == GammaMode::scale ? scale_gamma(x, m.k) : hp.gamma;
  m.kernel.coef0 = hp.coef0;
  m.kernel.degree = hp.degree;

  SvrDualSolution sol =
      solve_svr_dual(x, m.k, train.labels(), hp.c, hp.epsilon_bpm, m.kernel);
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const double beta = sol.alpha[i] - sol.alpha_star[i];
    if (beta == 0.0)
      continue;
    m.support.insert(m.support.end(), x.begin() + static_cast<std::ptrdiff_t>(i * m.k),
                     x.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.k));
    m.coef.push_back(beta);
  }
  m.bias = sol.bias;
  if (solution)
    *solution = std::move(sol);
  return m;
}

double SvrModel::predict(std::span<const double> x) const {
  std::vector<double> z(k);
  standardizer.apply(x, z);
  double out = bias;
  for (std::size_t s = 0; s < coef.size(); ++s)
    out += coef[s] * kernel(z, std::span<const double>(support.data() + s * k, k));
  return out;
}

} // namespace pulsehr::models
