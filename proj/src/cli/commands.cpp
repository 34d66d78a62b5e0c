#include "commands.hpp"

#include "pulsehr/dataset_io.hpp"
#include "pulsehr/error.hpp"
#include "pulsehr/eval.hpp"
#include "pulsehr/tuning.hpp"

#include <charconv>
#include <ostream>

namespace pulsehr::cli {

models::ModelKind parse_model(const std::string& name) {
  if (auto k = models::parse_kind(name))
    return *k;
  throw Error(ErrorCode::InvalidConfig,
              "unknown model '" + name + "' (expected dt, rf, knn, svr or mlp)");
}

Scenario parse_scenario_or_throw(const std::string& name) {
  if (auto s = parse_scenario(name))
    return *s;
  throw Error(ErrorCode::InvalidConfig,
              "unknown scenario '" + name + "' (expected sitting, sleeping or daily)");
}

dataset::SplitSpec split_spec(const Context& ctx) {
  dataset::SplitSpec spec;
  spec.train_fraction = ctx.split.train_fraction;
  spec.mode = ctx.split.mode == "random" ? dataset::SplitMode::random
                                         : dataset::SplitMode::chronological;
  spec.seed = ctx.seed;
  dataset::validate(spec);
  return spec;
}

namespace {

[[noreturn]] void bad_param(const std::string& assignment, const std::string& why) {
  throw Error(ErrorCode::InvalidConfig, "--param " + assignment + ": " + why);
}

template <class T> T parse_number(const std::string& assignment, std::string_view v) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    bad_param(assignment, "'" + std::string(v) + "' is not a number");
  return out;
}

bool parse_bool(const std::string& assignment, std::string_view v) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  bad_param(assignment, "expected true or false");
}

template <class T>
T parse_named(const std::string& assignment, std::optional<T> parsed, const char* choices) {
  if (!parsed)
    bad_param(assignment, std::string("expected one of ") + choices);
  return *parsed;
}

std::size_t require_k(std::size_t k) {
  if (k < 1)
    throw Error(ErrorCode::InvalidConfig, "--features must be >= 1");
  return k;
}

struct Loaded {
  HrSeries pphr;
  HrSeries truth;
};

void check_data_flags(const DataOpts& d) {
  if (d.ppg.empty() == d.pphr.empty())
    throw Error(ErrorCode::InvalidConfig, "give exactly one of --ppg or --pphr");
  if (d.truth.empty())
    throw Error(ErrorCode::InvalidConfig, "--truth is required");
}

Loaded load(const Context& ctx, const DataOpts& d) {
  Loaded l;
  l.truth = io::read_hr_csv(d.truth);
  if (!d.pphr.empty()) {
    l.pphr = io::read_hr_csv(d.pphr);
  } else {
    l.pphr = sigproc::stage2(io::read_ppg_csv(d.ppg), ctx.sigproc);
  }
  return l;
}

void write_json(const Context& ctx, const std::string& path, const nlohmann::json& j) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty())
    ctx.out << text;
  else
    io::write_file(path, text);
}

models::ModelArtifact read_model(const std::string& path) {
  return models::deserialize(io::read_bytes(path));
}

void warn_convergence(const Context& ctx, const models::ModelArtifact& m) {
  if (!m.meta().converged)
    ctx.err << "warning: " << to_string(ErrorCode::NoConvergence)
            << ": SVR solver stopped at the iteration cap; model flagged in its header\n";
}

} // namespace

void apply_param(models::Hyperparams& hp, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    bad_param(assignment, "expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string_view v = std::string_view(assignment).substr(eq + 1);
  bool known = true;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, models::DtParams>) {
          if (key == "max_depth") p.max_depth = parse_number<std::uint32_t>(assignment, v);
          else known = false;
        } else if constexpr (std::is_same_v<T, models::RfParams>) {
          if (key == "n_trees") p.n_trees = parse_number<std::uint32_t>(assignment, v);
          else if (key == "max_depth") p.max_depth = parse_number<std::uint32_t>(assignment, v);
          else if (key == "bootstrap") p.bootstrap = parse_bool(assignment, v);
          else known = false;
        } else if constexpr (std::is_same_v<T, models::KnnParams>) {
          if (key == "n_neighbors") p.n_neighbors = parse_number<std::uint32_t>(assignment, v);
          else if (key == "metric")
            p.metric = parse_named(assignment, models::parse_metric(v), "manhattan, euclidean");
          else known = false;
        } else if constexpr (std::is_same_v<T, models::SvrParams>) {
          if (key == "kernel")
            p.kernel = parse_named(assignment, models::parse_kernel(v), "rbf, sigmoid, polynomial");
          else if (key == "c") p.c = parse_number<double>(assignment, v);
          else if (key == "epsilon") p.epsilon_bpm = parse_number<double>(assignment, v);
          else if (key == "gamma") {
            if (v == "scale") {
              p.gamma_mode = models::GammaMode::scale;
            } else {
              p.gamma_mode = models::GammaMode::fixed;
              p.gamma = parse_number<double>(assignment, v);
            }
          } else if (key == "degree") p.degree = parse_number<std::uint32_t>(assignment, v);
          else if (key == "coef0") p.coef0 = parse_number<double>(assignment, v);
          else known = false;
        } else {
          if (key == "h1") p.layers[0] = parse_number<std::uint32_t>(assignment, v);
          else if (key == "h2") p.layers[1] = parse_number<std::uint32_t>(assignment, v);
          else if (key == "h3") p.layers[2] = parse_number<std::uint32_t>(assignment, v);
          else if (key == "activation")
            p.activation = parse_named(assignment, models::parse_activation(v), "relu, tanh");
          else if (key == "alpha") p.alpha = parse_number<double>(assignment, v);
          else if (key == "lr") p.lr = parse_number<double>(assignment, v);
          else if (key == "batch") p.batch = parse_number<std::uint32_t>(assignment, v);
          else if (key == "max_epochs") p.max_epochs = parse_number<std::uint32_t>(assignment, v);
          else if (key == "patience") p.patience = parse_number<std::uint32_t>(assignment, v);
          else if (key == "seed") p.seed = parse_number<std::uint64_t>(assignment, v);
          else known = false;
        }
      },
      hp);
  if (!known)
    bad_param(assignment, "unknown key for " + std::string(models::to_string(models::kind_of(hp))));
}

void cmd_synth(const Context& ctx, const SynthOpts& o) {
  auto cfg = synth::SynthConfig::preset(parse_scenario_or_throw(o.scenario), o.duration_s,
                                        o.fs_hz, ctx.seed);
  if (o.hr_start) cfg.hr_start_bpm = *o.hr_start;
  if (o.noise_std) cfg.noise_std = *o.noise_std;
  if (o.wander) cfg.baseline_wander_amp = *o.wander;
  if (o.ma_rate) cfg.ma_rate_per_min = *o.ma_rate;
  if (o.ma_amp) cfg.ma_amp = *o.ma_amp;
  if (o.ma_dur) cfg.ma_dur_s = *o.ma_dur;
  synth::validate(cfg);

  const auto data = synth::generate(cfg);
  io::write_ppg_csv(data.ppg, o.out);
  io::write_hr_csv(data.truth, o.truth);
  ctx.out << "synth: scenario=" << to_string(cfg.scenario) << " duration=" << cfg.duration_s
          << " s fs=" << cfg.fs_hz << " Hz samples=" << data.ppg.size()
          << " seed=" << cfg.seed << " -> " << o.out << ", " << o.truth << "\n";
}

void cmd_process(const Context& ctx, const ProcessOpts& o) {
  sigproc::validate(ctx.sigproc);
  const auto hr = sigproc::stage2(io::read_ppg_csv(o.in), ctx.sigproc);
  io::write_hr_csv(hr, o.out);
  ctx.out << "process: " << hr.size() << " readings at 1 Hz from t=" << hr.t0_s << " s -> "
          << o.out << "\n";
}

namespace {

std::pair<dataset::FeatureMatrix, dataset::FeatureMatrix>
prepare(const Context& ctx, const DataOpts& d, std::size_t k, HrSeries* pphr_out = nullptr) {
  const auto l = load(ctx, d);
  const auto fm = dataset::build_features(l.pphr, l.truth, k);
  if (pphr_out)
    *pphr_out = l.pphr;
  return dataset::split(fm, split_spec(ctx));
}

} // namespace

void cmd_train(const Context& ctx, const DataOpts& d, const TrainOpts& o) {
  auto hp = models::default_hyperparams(parse_model(o.model));
  if (auto* mlp = std::get_if<models::MlpParams>(&hp))
    mlp->seed = ctx.seed;
  for (const auto& p : o.params)
    apply_param(hp, p);
  models::validate(hp);
  const std::size_t k = require_k(o.features);
  sigproc::validate(ctx.sigproc);
  split_spec(ctx);
  check_data_flags(d);

  const auto [train, test] = prepare(ctx, d, k);
  const auto model = models::fit(train, hp, ctx.seed);
  const auto bytes = models::serialize(model);
  io::write_bytes(o.out, bytes);
  warn_convergence(ctx, model);
  ctx.out << "train: " << models::to_string(model.kind()) << " k=" << k << " rows=" << train.rows()
          << " " << models::describe(hp) << " size=" << bytes.size() << " B -> " << o.out << "\n";
}

void cmd_tune(const Context& ctx, const DataOpts& d, const TrainOpts& o) {
  tuning::SearchSpec spec;
  spec.kind = parse_model(o.model);
  spec.n_iter = o.iters;
  spec.n_folds = o.folds;
  spec.seed = ctx.seed;
  spec.threads = o.threads;
  tuning::validate(spec);
  const std::size_t k = require_k(o.features);
  sigproc::validate(ctx.sigproc);
  split_spec(ctx);
  check_data_flags(d);

  const auto [train, test] = prepare(ctx, d, k);
  const auto report = tuning::random_search(train, spec);
  const auto bytes = models::serialize(report.model);
  io::write_bytes(o.out, bytes);
  if (!o.report.empty())
    io::write_file(o.report, tuning::to_json(report).dump(2) + "\n");
  warn_convergence(ctx, report.model);
  ctx.out << "tune: " << models::to_string(spec.kind) << " k=" << k << " trials=" << spec.n_iter
          << " best=#" << report.best << " cv_mape=" << report.trials[report.best].mean_mape
          << "% " << models::describe(report.model.hyperparams()) << " size=" << bytes.size()
          << " B -> " << o.out << "\n";
}

void cmd_eval(const Context& ctx, const DataOpts& d, const EvalOpts& o) {
  if (o.model.empty() == !o.passthrough)
    throw Error(ErrorCode::InvalidConfig, "give exactly one of --model or --passthrough");
  sigproc::validate(ctx.sigproc);
  split_spec(ctx);
  check_data_flags(d);

  std::optional<models::ModelArtifact> model;
  if (!o.passthrough)
    model.emplace(read_model(o.model));
  const std::size_t k = model ? model->k() : require_k(o.features);
  HrSeries pphr;
  const auto [train, test] = prepare(ctx, d, k, &pphr);
  const auto report =
      model ? eval::evaluate(*model, test, pphr) : eval::evaluate_passthrough(test, pphr);
  write_json(ctx, o.out, eval::to_json(report));
  if (!o.out.empty())
    ctx.out << "eval: rows=" << report.n_rows << " mape=" << report.mape_pct
            << "% baseline=" << *report.baseline_mape_pct << "% -> " << o.out << "\n";
}

void cmd_bench(const Context& ctx, const DataOpts& d, const BenchOpts& o) {
  if (o.reps < 100 || o.warmup < 100)
    throw Error(ErrorCode::InvalidConfig, "--reps and --warmup must be >= 100");
  if (d.given()) {
    sigproc::validate(ctx.sigproc);
    split_spec(ctx);
    check_data_flags(d);
  }
  const auto model = read_model(o.model);

  eval::MetricsReport report;
  std::vector<double> probe(model.k(), kFallbackHrBpm);
  if (d.given()) {
    HrSeries pphr;
    const auto [train, test] = prepare(ctx, d, model.k(), &pphr);
    report = eval::evaluate(model, test, pphr);
    const auto row = test.row(0);
    probe.assign(row.begin(), row.end());
  }
  report.model_size_bytes = models::model_size(model);
  report.latency = eval::bench_latency(model, probe, o.reps, o.warmup);
  write_json(ctx, o.out, eval::to_json(report));
  if (!o.out.empty())
    ctx.out << "bench: " << models::to_string(model.kind()) << " k=" << model.k()
            << " median=" << report.latency->median_us << " us p99=" << report.latency->p99_us
            << " us -> " << o.out << "\n";
}

} // namespace pulsehr::cli
