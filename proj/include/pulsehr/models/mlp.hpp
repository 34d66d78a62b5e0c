#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/hyperparams.hpp"
#include "pulsehr/models/standardize.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pulsehr::models {

/// Fully connected network with a linear scalar output.
struct MlpNetwork {
  std::vector<std::uint32_t> sizes; // input, hidden..., 1
  Activation activation = Activation::relu;
  /// weights[l] is sizes[l+1] x sizes[l], row-major.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static MlpNetwork init(std::span<const std::uint32_t> sizes, Activation act, std::uint64_t seed);

  std::size_t layer_count() const noexcept { return weights.size(); }
  double forward(std::span<const double> x) const;

  bool operator==(const MlpNetwork&) const = default;
};

struct MlpGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

/// loss = mean((f(x) - y)^2) + alpha / 2 * sum(weights^2); biases are not
/// penalised. `x` is row-major, one row per target.
MlpGradient mlp_loss_gradient(const MlpNetwork& net, std::span<const double> x,
                              std::span<const double> y, double alpha);

/// Loss only (same definition as mlp_loss_gradient).
double mlp_loss(const MlpNetwork& net, std::span<const double> x, std::span<const double> y,
                double alpha);

/// k -> h1 -> h2 -> h3 -> 1 regressor trained with Adam on standardized
/// inputs and targets; the last 10% of training rows drive early stopping.
struct MlpModel {
  MlpNetwork net;
  Standardizer x_scaler;
  double y_mean = 0.0;
  double y_scale = 1.0;

  static MlpModel fit(const dataset::FeatureMatrix& train, const MlpParams& hp);

  double predict(std::span<const double> x) const;

  bool operator==(const MlpModel&) const = default;
};

} // namespace pulsehr::models
