#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/sigproc.hpp"
#include "pulsehr/synth.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pulsehr::cli {

struct DataOpts {
  std::string ppg;
  std::string pphr;
  std::string truth;
  bool given() const { return !ppg.empty() || !pphr.empty() || !truth.empty(); }
};

struct SplitOpts {
  double train_fraction = 0.8;
  std::string mode = "chronological";
};

struct SynthOpts {
  std::string scenario = "daily";
  double duration_s = 600.0;
  double fs_hz = kDefaultPpgRateHz;
  std::optional<double> hr_start, noise_std, wander, ma_rate, ma_amp, ma_dur;
  std::string out, truth;
};

struct ProcessOpts {
  std::string in, out;
};

struct TrainOpts {
  std::string model = "dt";
  std::size_t features = 15;
  std::vector<std::string> params;
  std::string out;
  // tune only
  std::size_t iters = 20;
  std::size_t folds = 5;
  std::size_t threads = 1;
  std::string report;
};

struct EvalOpts {
  std::string model;
  bool passthrough = false;
  std::size_t features = 15;
  std::string out;
};

struct BenchOpts {
  std::string model;
  std::size_t reps = 10'000;
  std::size_t warmup = 1'000;
  std::string out;
};

struct PipelineOpts {
  std::vector<std::string> ppg, truth;
  std::size_t subjects = 3;
  std::string scenario = "daily";
  double duration_s = 3600.0;
  double fs_hz = kDefaultPpgRateHz;
  std::string features = "2,4,6,8,10,15";
  std::string models = "dt,rf,knn,svr,mlp";
  std::size_t iters = 20;
  std::size_t folds = 5;
  std::size_t threads = 1;
  std::size_t reps = 10'000;
  std::size_t warmup = 1'000;
  bool no_bench = false;
  std::string out_dir = "pipeline_out";
};

struct Context {
  std::uint64_t seed = 0;
  sigproc::SigprocConfig sigproc;
  SplitOpts split;
  std::ostream& out;
  std::ostream& err;
};

/// Throws InvalidConfig when `name` is not a model kind.
models::ModelKind parse_model(const std::string& name);
/// Throws InvalidConfig when `name` is not a scenario.
Scenario parse_scenario_or_throw(const std::string& name);
dataset::SplitSpec split_spec(const Context& ctx);
/// Applies `key=value` overrides to a hyperparameter set.
void apply_param(models::Hyperparams& hp, const std::string& assignment);

void cmd_synth(const Context& ctx, const SynthOpts& o);
void cmd_process(const Context& ctx, const ProcessOpts& o);
void cmd_train(const Context& ctx, const DataOpts& d, const TrainOpts& o);
void cmd_tune(const Context& ctx, const DataOpts& d, const TrainOpts& o);
void cmd_eval(const Context& ctx, const DataOpts& d, const EvalOpts& o);
void cmd_bench(const Context& ctx, const DataOpts& d, const BenchOpts& o);
void cmd_pipeline(const Context& ctx, const PipelineOpts& o);

} // namespace pulsehr::cli
