#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace pulsehr::models {

enum class ModelKind : std::uint8_t { dt = 0, rf = 1, knn = 2, svr = 3, mlp = 4 };

inline constexpr std::array<ModelKind, 5> kAllKinds{ModelKind::dt, ModelKind::rf, ModelKind::knn,
                                                    ModelKind::svr, ModelKind::mlp};

std::string_view to_string(ModelKind kind) noexcept;
std::optional<ModelKind> parse_kind(std::string_view name) noexcept;

enum class Metric : std::uint8_t { manhattan = 0, euclidean = 1 };
enum class Kernel : std::uint8_t { rbf = 0, sigmoid = 1, polynomial = 2 };
enum class GammaMode : std::uint8_t { scale = 0, fixed = 1 };
enum class Activation : std::uint8_t { relu = 0, tanh = 1 };

std::string_view to_string(Metric m) noexcept;
std::string_view to_string(Kernel k) noexcept;
std::string_view to_string(Activation a) noexcept;
std::optional<Metric> parse_metric(std::string_view s) noexcept;
std::optional<Kernel> parse_kernel(std::string_view s) noexcept;
std::optional<Activation> parse_activation(std::string_view s) noexcept;

struct DtParams {
  std::uint32_t max_depth = 8;
  bool operator==(const DtParams&) const = default;
};

struct RfParams {
  std::uint32_t n_trees = 10;
  std::uint32_t max_depth = 5;
  bool bootstrap = true;
  bool operator==(const RfParams&) const = default;
};

struct KnnParams {
  std::uint32_t n_neighbors = 5;
  Metric metric = Metric::euclidean;
  bool operator==(const KnnParams&) const = default;
};

struct SvrParams {
  Kernel kernel = Kernel::rbf;
  double c = 1.0;
  /// Half-width of the insensitive tube, in bpm.
  double epsilon_bpm = 0.5;
  /// scale: gamma = 1 / (k * var(standardized features)) = 1 / k.
  GammaMode gamma_mode = GammaMode::scale;
  double gamma = 0.0;
  std::uint32_t degree = 3;
  double coef0 = 0.0;
  bool operator==(const SvrParams&) const = default;
};

struct MlpParams {
  std::array<std::uint32_t, 3> layers{10, 10, 10};
  Activation activation = Activation::relu;
  double alpha = 1e-4;
  double lr = 1e-3;
  std::uint32_t batch = 32;
  std::uint32_t max_epochs = 500;
  std::uint32_t patience = 20;
  std::uint64_t seed = 0;
  bool operator==(const MlpParams&) const = default;
};

/// Alternative index matches ModelKind.
using Hyperparams = std::variant<DtParams, RfParams, KnnParams, SvrParams, MlpParams>;

ModelKind kind_of(const Hyperparams& hp) noexcept;
Hyperparams default_hyperparams(ModelKind kind);

/// Throws InvalidConfig when a field falls outside its search range.
void validate(const Hyperparams& hp);

/// Compact human-readable form, e.g. "max_depth=8".
std::string describe(const Hyperparams& hp);

} // namespace pulsehr::models
