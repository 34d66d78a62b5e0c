// Model file layout (all integers little-endian, floats IEEE-754 binary64):
//
//   "PHRM" | version u8 | kind u8
//   u32 header length | header: k u32, n_rows u64, seed u64, flags u8,
//                               hyperparameters in fixed field order
//   u32 payload length | payload (per kind, see write_payload)
//
// Nothing may follow the payload section.

#include "byte_io.hpp"
#include "pulsehr/models/artifact.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace pulsehr::models {

namespace {

using detail::ByteReader;
using detail::ByteWriter;

constexpr std::array<std::uint8_t, 4> kMagic{'P', 'H', 'R', 'M'};
constexpr std::uint8_t kFlagNotConverged = 0x01;

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptPayload, what);
}

void write_hyperparams(ByteWriter& w, const Hyperparams& hp) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DtParams>) {
          w.u32(p.max_depth);
        } else if constexpr (std::is_same_v<T, RfParams>) {
          w.u32(p.n_trees);
          w.u32(p.max_depth);
          w.u8(p.bootstrap ? 1 : 0);
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          w.u32(p.n_neighbors);
          w.u8(static_cast<std::uint8_t>(p.metric));
        } else if constexpr (std::is_same_v<T, SvrParams>) {
          w.u8(static_cast<std::uint8_t>(p.kernel));
          w.f64(p.c);
          w.f64(p.epsilon_bpm);
          w.u8(static_cast<std::uint8_t>(p.gamma_mode));
          w.f64(p.gamma);
          w.u32(p.degree);
          w.f64(p.coef0);
        } else {
          for (auto h : p.layers)
            w.u32(h);
          w.u8(static_cast<std::uint8_t>(p.activation));
          w.f64(p.alpha);
          w.f64(p.lr);
          w.u32(p.batch);
          w.u32(p.max_epochs);
          w.u32(p.patience);
          w.u64(p.seed);
        }
      },
      hp);
}

template <class E> E read_enum(ByteReader& r, std::uint8_t max, const char* what) {
  const std::uint8_t v = r.u8();
  if (v > max)
    corrupt(std::string("invalid ") + what + " code " + std::to_string(v));
  return static_cast<E>(v);
}

bool read_bool(ByteReader& r) {
  const std::uint8_t v = r.u8();
  if (v > 1)
    corrupt("invalid boolean byte " + std::to_string(v));
  return v == 1;
}

Hyperparams read_hyperparams(ByteReader& r, ModelKind kind) {
  switch (kind) {
  case ModelKind::dt: return DtParams{r.u32()};
  case ModelKind::rf: {
    RfParams p;
    p.n_trees = r.u32();
    p.max_depth = r.u32();
    p.bootstrap = read_bool(r);
    return p;
  }
  case ModelKind::knn: {
    KnnParams p;
    p.n_neighbors = r.u32();
    p.metric = read_enum<Metric>(r, 1, "metric");
    return p;
  }
  case ModelKind::svr: {
    SvrParams p;
    p.kernel = read_enum<Kernel>(r, 2, "kernel");
    p.c = r.f64();
    p.epsilon_bpm = r.f64();
    p.gamma_mode = read_enum<GammaMode>(r, 1, "gamma mode");
    p.gamma = r.f64();
    p.degree = r.u32();
    p.coef0 = r.f64();
    return p;
  }
  case ModelKind::mlp: {
    MlpParams p;
    for (auto& h : p.layers)
      h = r.u32();
    p.activation = read_enum<Activation>(r, 1, "activation");
    p.alpha = r.f64();
    p.lr = r.f64();
    p.batch = r.u32();
    p.max_epochs = r.u32();
    p.patience = r.u32();
    p.seed = r.u64();
    return p;
  }
  }
  corrupt("unknown model kind");
}

void write_tree(ByteWriter& w, const RegressionTree& tree) {
  w.u32(static_cast<std::uint32_t>(tree.nodes().size()));
  for (const auto& n : tree.nodes()) {
    w.u16(n.feature);
    w.f64(n.threshold);
    w.u8(n.leaf ? 1 : 0);
    w.f64(n.value);
  }
}

RegressionTree read_tree(ByteReader& r, std::size_t k) {
  const std::uint32_t count = r.u32();
  // 19 bytes per node; reject impossible counts before allocating.
  if (count > r.remaining() / 19)
    throw Error(ErrorCode::TruncatedPayload, "tree node list exceeds payload");
  std::vector<TreeNode> nodes(count);
  for (auto& n : nodes) {
    n.feature = r.u16();
    n.threshold = r.f64();
    n.leaf = read_bool(r);
    n.value = r.f64();
  }
  return RegressionTree::from_preorder(std::move(nodes), k);
}

void write_standardizer(ByteWriter& w, const Standardizer& s) {
  w.f64s(s.mean);
  w.f64s(s.scale);
}

Standardizer read_standardizer(ByteReader& r, std::size_t k) {
  Standardizer s;
  s.mean = r.f64s(k);
  s.scale = r.f64s(k);
  return s;
}

void write_payload(ByteWriter& w, const Payload& payload) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RegressionTree>) {
          write_tree(w, m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          w.u32(static_cast<std::uint32_t>(m.trees.size()));
          for (const auto& t : m.trees)
            write_tree(w, t);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          w.u32(static_cast<std::uint32_t>(m.size()));
          w.f64s(m.rows);
          w.f64s(m.labels);
        } else if constexpr (std::is_same_v<T, SvrModel>) {
          w.u32(static_cast<std::uint32_t>(m.support_count()));
          w.f64(m.kernel.gamma);
          w.f64s(m.support);
          w.f64s(m.coef);
          w.f64(m.bias);
          write_standardizer(w, m.standardizer);
        } else {
          w.u32(static_cast<std::uint32_t>(m.net.sizes.size()));
          for (auto s : m.net.sizes)
            w.u32(s);
          for (const auto& layer : m.net.weights)
            w.f64s(layer);
          for (const auto& layer : m.net.biases)
            w.f64s(layer);
          write_standardizer(w, m.x_scaler);
          w.f64(m.y_mean);
          w.f64(m.y_scale);
        }
      },
      payload);
}

Payload read_payload(ByteReader& r, const Hyperparams& hp, std::size_t k) {
  switch (kind_of(hp)) {
  case ModelKind::dt: return read_tree(r, k);
  case ModelKind::rf: {
    ForestModel f;
    const std::uint32_t count = r.u32();
    if (count != std::get<RfParams>(hp).n_trees)
      corrupt("forest tree count disagrees with n_trees");
    for (std::uint32_t t = 0; t < count; ++t)
      f.trees.push_back(read_tree(r, k));
    return f;
  }
  case ModelKind::knn: {
    const auto& p = std::get<KnnParams>(hp);
    KnnModel m;
    m.k = k;
    m.n_neighbors = p.n_neighbors;
    m.metric = p.metric;
    const std::uint32_t rows = r.u32();
    if (rows < p.n_neighbors || rows == 0)
      corrupt("KNN stores fewer rows than n_neighbors");
    if (k != 0 && rows > r.remaining() / (8 * k))
      throw Error(ErrorCode::TruncatedPayload, "KNN rows exceed payload");
    m.rows = r.f64s(static_cast<std::size_t>(rows) * k);
    m.labels = r.f64s(rows);
    return m;
  }
  case ModelKind::svr: {
    const auto& p = std::get<SvrParams>(hp);
    SvrModel m;
    m.k = k;
    const std::uint32_t count = r.u32();
    m.kernel = KernelSpec{p.kernel, r.f64(), p.coef0, p.degree};
    if (k != 0 && count > r.remaining() / (8 * k))
      throw Error(ErrorCode::TruncatedPayload, "support vectors exceed payload");
    m.support = r.f64s(static_cast<std::size_t>(count) * k);
    m.coef = r.f64s(count);
    m.bias = r.f64();
    m.standardizer = read_standardizer(r, k);
    return m;
  }
  case ModelKind::mlp: {
    const auto& p = std::get<MlpParams>(hp);
    MlpModel m;
    const std::uint32_t n_sizes = r.u32();
    if (n_sizes != 5)
      corrupt("MLP must have 5 layer sizes");
    for (std::uint32_t i = 0; i < n_sizes; ++i)
      m.net.sizes.push_back(r.u32());
    const std::vector<std::uint32_t> expected{static_cast<std::uint32_t>(k), p.layers[0],
                                              p.layers[1], p.layers[2], 1};
    if (m.net.sizes != expected)
      corrupt("MLP layer sizes disagree with hyperparameters");
    m.net.activation = p.activation;
    for (std::size_t l = 0; l + 1 < n_sizes; ++l)
      m.net.weights.push_back(
          r.f64s(static_cast<std::size_t>(m.net.sizes[l]) * m.net.sizes[l + 1]));
    for (std::size_t l = 0; l + 1 < n_sizes; ++l)
      m.net.biases.push_back(r.f64s(m.net.sizes[l + 1]));
    m.x_scaler = read_standardizer(r, k);
    m.y_mean = r.f64();
    m.y_scale = r.f64();
    return m;
  }
  }
  corrupt("unknown model kind");
}

} // namespace

std::vector<std::uint8_t> serialize(const ModelArtifact& m) {
  ByteWriter header;
  header.u32(m.meta().k);
  header.u64(m.meta().n_rows);
  header.u64(m.meta().seed);
  header.u8(m.meta().converged ? 0 : kFlagNotConverged);
  write_hyperparams(header, m.hyperparams());

  ByteWriter payload;
  write_payload(payload, m.payload());

  ByteWriter out;
  out.bytes(kMagic);
  out.u8(kModelFormatVersion);
  out.u8(static_cast<std::uint8_t>(m.kind()));
  out.section(header);
  out.section(payload);
  return out.take();
}

ModelArtifact deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw Error(ErrorCode::BadMagic, "not a model file (missing PHRM magic)");
  ByteReader r(bytes.subspan(kMagic.size()));
  const std::uint8_t version = r.u8();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::UnsupportedVersion,
                "model format version " + std::to_string(version) + " is not supported");
  const auto kind = read_enum<ModelKind>(r, 4, "model kind");

  ByteReader header = r.section();
  TrainMeta meta;
  meta.k = header.u32();
  meta.n_rows = header.u64();
  meta.seed = header.u64();
  const std::uint8_t flags = header.u8();
  if (flags & ~kFlagNotConverged)
    corrupt("unknown header flags");
  meta.converged = (flags & kFlagNotConverged) == 0;
  Hyperparams hp = read_hyperparams(header, kind);
  if (header.remaining() != 0)
    corrupt("trailing bytes in header section");
  try {
    validate(hp);
  } catch (const Error& e) {
    corrupt(std::string("stored hyperparameters invalid: ") + e.what());
  }
  if (meta.k == 0)
    corrupt("feature count must be >= 1");

  ByteReader payload_reader = r.section();
  Payload payload = read_payload(payload_reader, hp, meta.k);
  if (payload_reader.remaining() != 0)
    corrupt("trailing bytes in payload section");
  if (r.remaining() != 0)
    corrupt("trailing bytes after payload section");
  return ModelArtifact(std::move(hp), std::move(payload), meta);
}

std::size_t model_size(const ModelArtifact& m) { return serialize(m).size(); }

} // namespace pulsehr::models
