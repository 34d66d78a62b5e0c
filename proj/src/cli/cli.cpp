#include "pulsehr/cli.hpp"

#include "commands.hpp"
#include "pulsehr/dataset_io.hpp"
#include "pulsehr/error.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>

namespace pulsehr::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

void add_sigproc_flags(CLI::App* cmd, sigproc::SigprocConfig& cfg) {
  cmd->add_option("--window", cfg.window_s, "Peak-detection window (s)");
  cmd->add_option("--hop", cfg.hop_s, "Window hop (s)");
  cmd->add_option("--detrend", cfg.detrend_window_s, "Detrend moving-average window (s)");
  cmd->add_option("--prominence", cfg.min_prominence_factor,
                  "Minimum peak prominence, in units of the window std");
  cmd->add_option("--max-hr", cfg.max_hr_bpm, "Highest HR the refractory period allows (bpm)");
  cmd->add_option("--z-threshold", cfg.z_threshold, "Outlier |z| threshold");
  cmd->add_option("--z-window", cfg.z_window_readings, "Z-score window (readings)");
  cmd->add_option("--clamp", cfg.clamp_bound, "Per-second slew bound (fraction)");
  cmd->add_option("--channel", cfg.channel, "Channel used for two-channel input (0 or 1)");
}

void add_split_flags(CLI::App* cmd, SplitOpts& s) {
  cmd->add_option("--train-fraction", s.train_fraction, "Fraction of rows used for training");
  cmd->add_option("--split", s.mode, "Split mode")
      ->check(CLI::IsMember({"chronological", "random"}));
}

void add_data_flags(CLI::App* cmd, DataOpts& d) {
  cmd->add_option("--ppg", d.ppg, "PPG CSV (t_s,ch1[,ch2])");
  cmd->add_option("--pphr", d.pphr, "Precomputed Stage-2 HR CSV, instead of --ppg");
  cmd->add_option("--truth", d.truth, "Ground-truth HR CSV (t_s,hr_bpm)");
}

const CLI::Validator kModelName(
    [](std::string& s) -> std::string {
      return models::parse_kind(s) ? "" : "unknown model '" + s + "' (dt, rf, knn, svr, mlp)";
    },
    "dt|rf|knn|svr|mlp");

// Moves `--config FILE` / `--config=FILE` out of the arguments and splices the
// file's settings in right after the command name, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t erase = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      erase = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      erase = 1;
    } else {
      continue;
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i + erase));
    const auto extra = config_args(io::read_file(path));
    const std::size_t at = std::min<std::size_t>(2, args.size());
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    break;
  }
  return args;
}

} // namespace

std::vector<std::string> config_args(std::string_view text) {
  std::vector<std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty())
      throw Error(ErrorCode::InvalidConfig,
                  "config line is not key=value: '" + std::string(line) + "'", line_no);
    out.push_back("--" + std::string(trim(line.substr(0, eq))) + "=" +
                  std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("PULSEHR_SEED");
  if (env == nullptr || *env == '\0')
    return kDefaultSeed;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidConfig,
                "PULSEHR_SEED must be an unsigned integer, got '" + std::string(s) + "'");
  return v;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PPG heart-rate estimation: signal processing plus lightweight regressors",
               "pulsehr"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "pulsehr 1.0");

  std::uint64_t seed = 0;
  sigproc::SigprocConfig sp;
  SplitOpts split;
  DataOpts data;
  SynthOpts synth_o;
  ProcessOpts process_o;
  TrainOpts train_o;
  EvalOpts eval_o;
  BenchOpts bench_o;
  PipelineOpts pipe_o;

  const auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed (default: PULSEHR_SEED or 42)");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic PPG recording and its true HR");
  synth->add_option("--scenario", synth_o.scenario, "Activity scenario")
      ->check(CLI::IsMember({"sitting", "sleeping", "daily"}));
  synth->add_option("--duration", synth_o.duration_s, "Duration (s)");
  synth->add_option("--fs", synth_o.fs_hz, "PPG sampling rate (Hz)");
  synth->add_option("--hr-start", synth_o.hr_start, "Initial HR (bpm)");
  synth->add_option("--noise-std", synth_o.noise_std, "White-noise standard deviation");
  synth->add_option("--wander", synth_o.wander, "Baseline wander amplitude");
  synth->add_option("--ma-rate", synth_o.ma_rate, "Motion-artifact bursts per minute");
  synth->add_option("--ma-amp", synth_o.ma_amp, "Motion-artifact RMS amplitude");
  synth->add_option("--ma-dur", synth_o.ma_dur, "Motion-artifact burst length (s)");
  synth->add_option("--out", synth_o.out, "Output PPG CSV")->required();
  synth->add_option("--truth", synth_o.truth, "Output ground-truth HR CSV")->required();
  add_seed(synth);

  auto* process = app.add_subcommand("process", "Run Stage-2 signal processing on a PPG CSV");
  process->add_option("--in", process_o.in, "Input PPG CSV")->required();
  process->add_option("--out", process_o.out, "Output 1 Hz HR CSV")->required();
  add_sigproc_flags(process, sp);

  const auto add_model_flags = [&](CLI::App* cmd) {
    add_data_flags(cmd, data);
    add_sigproc_flags(cmd, sp);
    add_split_flags(cmd, split);
    add_seed(cmd);
    cmd->add_option("--model", train_o.model, "Model kind")->check(kModelName);
    cmd->add_option("--features", train_o.features, "Number of lagged Stage-2 readings (k)");
    cmd->add_option("--out", train_o.out, "Output model file")->required();
  };

  auto* train = app.add_subcommand("train", "Fit one model with fixed hyperparameters");
  add_model_flags(train);
  train->add_option("--param", train_o.params, "Hyperparameter override key=value (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto* tune = app.add_subcommand("tune", "Random-search hyperparameters and refit the best");
  add_model_flags(tune);
  tune->add_option("--iters", train_o.iters, "Random-search trials");
  tune->add_option("--folds", train_o.folds, "Contiguous cross-validation folds");
  tune->add_option("--threads", train_o.threads, "Worker threads (0 = all cores)");
  tune->add_option("--report", train_o.report, "Search report JSON");

  auto* eval = app.add_subcommand("eval", "Score a model against truth and the Stage-2 baseline");
  add_data_flags(eval, data);
  add_sigproc_flags(eval, sp);
  add_split_flags(eval, split);
  add_seed(eval);
  auto* eval_model = eval->add_option("--model", eval_o.model, "Model file");
  eval->add_flag("--passthrough", eval_o.passthrough,
                 "Score the predict-newest-reading model instead of a file")
      ->excludes(eval_model);
  eval->add_option("--features", eval_o.features, "k for --passthrough");
  eval->add_option("--out", eval_o.out, "Metrics JSON (default: stdout)");

  auto* bench = app.add_subcommand("bench", "Measure single-reading inference latency");
  bench->add_option("--model", bench_o.model, "Model file")->required();
  bench->add_option("--reps", bench_o.reps, "Timed predictions (>= 100)");
  bench->add_option("--warmup", bench_o.warmup, "Untimed warmup predictions (>= 100)");
  bench->add_option("--out", bench_o.out, "Metrics JSON (default: stdout)");
  add_data_flags(bench, data);
  add_sigproc_flags(bench, sp);
  add_split_flags(bench, split);
  add_seed(bench);

  auto* pipeline = app.add_subcommand(
      "pipeline", "Synthesize or load subjects, tune every model per feature count, report");
  pipeline->add_option("--ppg", pipe_o.ppg, "Subject PPG CSV (repeatable, pairs with --truth)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  pipeline->add_option("--truth", pipe_o.truth, "Subject truth CSV (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  pipeline->add_option("--subjects", pipe_o.subjects, "Synthetic subjects when no CSVs given");
  pipeline->add_option("--scenario", pipe_o.scenario, "Synthetic scenario")
      ->check(CLI::IsMember({"sitting", "sleeping", "daily"}));
  pipeline->add_option("--duration", pipe_o.duration_s, "Synthetic duration per subject (s)");
  pipeline->add_option("--fs", pipe_o.fs_hz, "Synthetic PPG rate (Hz)");
  pipeline->add_option("--features", pipe_o.features, "Comma-separated feature counts");
  pipeline->add_option("--models", pipe_o.models, "Comma-separated model kinds");
  pipeline->add_option("--iters", pipe_o.iters, "Random-search trials per cell");
  pipeline->add_option("--folds", pipe_o.folds, "Cross-validation folds");
  pipeline->add_option("--threads", pipe_o.threads, "Worker threads (0 = all cores)");
  pipeline->add_option("--reps", pipe_o.reps, "Latency reps per cell");
  pipeline->add_option("--warmup", pipe_o.warmup, "Latency warmup per cell");
  pipeline->add_flag("--no-bench", pipe_o.no_bench, "Skip latency measurement");
  pipeline->add_option("--out-dir", pipe_o.out_dir, "Output directory");
  add_sigproc_flags(pipeline, sp);
  add_split_flags(pipeline, split);
  add_seed(pipeline);

  for (auto* cmd : {synth, process, train, tune, eval, bench, pipeline})
    cmd->add_option("--config", "key=value settings file (flags override it)");

  try {
    seed = default_seed();
    auto args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty())
      reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitRuntime;
  }

  Context ctx{seed, sp, split, out, err};
  try {
    if (*synth)
      cmd_synth(ctx, synth_o);
    else if (*process)
      cmd_process(ctx, process_o);
    else if (*train)
      cmd_train(ctx, data, train_o);
    else if (*tune)
      cmd_tune(ctx, data, train_o);
    else if (*eval)
      cmd_eval(ctx, data, eval_o);
    else if (*bench)
      cmd_bench(ctx, data, bench_o);
    else if (*pipeline)
      cmd_pipeline(ctx, pipe_o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace pulsehr::cli
