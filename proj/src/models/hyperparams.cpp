#include "pulsehr/models/hyperparams.hpp"

#include "pulsehr/error.hpp"

#include <cmath>
#include <sstream>

namespace pulsehr::models {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
  case ModelKind::dt: return "dt";
  case ModelKind::rf: return "rf";
  case ModelKind::knn: return "knn";
  case ModelKind::svr: return "svr";
  case ModelKind::mlp: return "mlp";
  }
  return "dt";
}

std::optional<ModelKind> parse_kind(std::string_view name) noexcept {
  for (ModelKind k : kAllKinds)
    if (name == to_string(k))
      return k;
  if (name == "svm")
    return ModelKind::svr;
  return std::nullopt;
}

std::string_view to_string(Metric m) noexcept {
  return m == Metric::manhattan ? "manhattan" : "euclidean";
}

std::string_view to_string(Kernel k) noexcept {
  switch (k) {
  case Kernel::rbf: return "rbf";
  case Kernel::sigmoid: return "sigmoid";
  case Kernel::polynomial: return "polynomial";
  }
  return "rbf";
}

std::string_view to_string(Activation a) noexcept {
  return a == Activation::relu ? "relu" : "tanh";
}

std::optional<Metric> parse_metric(std::string_view s) noexcept {
  if (s == "manhattan")
    return Metric::manhattan;
  if (s == "euclidean")
    return Metric::euclidean;
  return std::nullopt;
}

std::optional<Kernel> parse_kernel(std::string_view s) noexcept {
  if (s == "rbf")
    return Kernel::rbf;
  if (s == "sigmoid")
    return Kernel::sigmoid;
  if (s == "polynomial" || s == "poly")
    return Kernel::polynomial;
  return std::nullopt;
}

std::optional<Activation> parse_activation(std::string_view s) noexcept {
  if (s == "relu")
    return Activation::relu;
  if (s == "tanh")
    return Activation::tanh;
  return std::nullopt;
}

ModelKind kind_of(const Hyperparams& hp) noexcept {
  return static_cast<ModelKind>(hp.index());
}

Hyperparams default_hyperparams(ModelKind kind) {
  switch (kind) {
  case ModelKind::dt: return DtParams{};
  case ModelKind::rf: return RfParams{};
  case ModelKind::knn: return KnnParams{};
  case ModelKind::svr: return SvrParams{};
  case ModelKind::mlp: return MlpParams{};
  }
  return DtParams{};
}

namespace {

void require(bool ok, const char* what) {
  if (!ok)
    throw Error(ErrorCode::InvalidConfig, what);
}

bool in_log_range(double v) { return std::isfinite(v) && v >= 1e-5 && v <= 10.0; }

} // namespace

void validate(const Hyperparams& hp) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DtParams>) {
          require(p.max_depth >= 1 && p.max_depth <= 20, "DT max_depth must be in 1..20");
        } else if constexpr (std::is_same_v<T, RfParams>) {
          require(p.n_trees >= 1 && p.n_trees <= 30, "RF n_trees must be in 1..30");
          require(p.max_depth >= 3 && p.max_depth <= 7, "RF max_depth must be in 3..7");
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          require(p.n_neighbors >= 1 && p.n_neighbors <= 30, "KNN n_neighbors must be in 1..30");
        } else if constexpr (std::is_same_v<T, SvrParams>) {
          require(in_log_range(p.c), "SVR c must be in [1e-5, 10]");
          require(std::isfinite(p.epsilon_bpm) && p.epsilon_bpm >= 0.0,
                  "SVR epsilon_bpm must be >= 0");
          require(p.gamma_mode == GammaMode::scale || (std::isfinite(p.gamma) && p.gamma > 0.0),
                  "SVR fixed gamma must be > 0");
          require(p.degree >= 1 && p.degree <= 10, "SVR degree must be in 1..10");
          require(std::isfinite(p.coef0), "SVR coef0 must be finite");
        } else {
          for (auto h : p.layers)
            require(h >= 2 && h <= 15, "MLP hidden layer sizes must be in 2..15");
          require(in_log_range(p.alpha), "MLP alpha must be in [1e-5, 10]");
          require(std::isfinite(p.lr) && p.lr > 0.0, "MLP lr must be > 0");
          require(p.batch >= 1, "MLP batch must be >= 1");
          require(p.max_epochs >= 1, "MLP max_epochs must be >= 1");
          require(p.patience >= 1, "MLP patience must be >= 1");
        }
      },
      hp);
}

std::string describe(const Hyperparams& hp) {
  std::ostringstream os;
  os.precision(6);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DtParams>) {
          os << "max_depth=" << p.max_depth;
        } else if constexpr (std::is_same_v<T, RfParams>) {
          os << "n_trees=" << p.n_trees << " max_depth=" << p.max_depth
             << " bootstrap=" << (p.bootstrap ? "true" : "false");
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          os << "n_neighbors=" << p.n_neighbors << " metric=" << to_string(p.metric);
        } else if constexpr (std::is_same_v<T, SvrParams>) {
          os << "kernel=" << to_string(p.kernel) << " c=" << p.c << " epsilon=" << p.epsilon_bpm;
          if (p.gamma_mode == GammaMode::fixed)
            os << " gamma=" << p.gamma;
          if (p.kernel == Kernel::polynomial)
            os << " degree=" << p.degree;
        } else {
          os << "layers=" << p.layers[0] << "x" << p.layers[1] << "x" << p.layers[2]
             << " activation=" << to_string(p.activation) << " alpha=" << p.alpha;
        }
      },
      hp);
  return os.str();
}

} // namespace pulsehr::models
