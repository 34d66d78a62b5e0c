#include "commands.hpp"

#include "pulsehr/dataset_io.hpp"
#include "pulsehr/error.hpp"
#include "pulsehr/eval.hpp"
#include "pulsehr/rng.hpp"
#include "pulsehr/tuning.hpp"

#include <charconv>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace pulsehr::cli {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string::npos ? comma : comma - start));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_features(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    std::size_t k = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), k);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || k == 0)
      throw Error(ErrorCode::InvalidConfig, "--features: '" + item + "' is not a positive integer");
    out.push_back(k);
  }
  return out;
}

struct Subject {
  std::string name;
  PpgRecording ppg;
  HrSeries truth;
};

struct Cell {
  std::vector<double> mape;
  std::vector<std::size_t> size;
  std::vector<double> latency_median;
  std::vector<nlohmann::json> hyperparams;
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void write_trace(const fs::path& path, const eval::MetricsReport& r) {
  std::string out = "t_s,truth_bpm,sigproc_bpm,pred_bpm\n";
  for (std::size_t i = 0; i < r.n_rows; ++i)
    out += io::format_double(r.times[i]) + "," + io::format_double(r.truth[i]) + "," +
           io::format_double(r.baseline[i]) + "," + io::format_double(r.predicted[i]) + "\n";
  io::write_file(path, out);
}

std::string render_table(const std::string& title, const std::vector<std::size_t>& ks,
                         const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  constexpr int kNameWidth = 10;
  constexpr int kCellWidth = 16;
  std::ostringstream os;
  os << title << "\n" << std::left << std::setw(kNameWidth) << "Model";
  for (auto k : ks)
    os << std::setw(kCellWidth) << ("k=" + std::to_string(k));
  os << "\n";
  for (const auto& [name, cells] : rows) {
    os << std::setw(kNameWidth) << name;
    for (const auto& c : cells)
      os << std::setw(kCellWidth) << c;
    os << "\n";
  }
  return os.str();
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

} // namespace

void cmd_pipeline(const Context& ctx, const PipelineOpts& o) {
  const auto ks = parse_features(o.features);
  std::vector<models::ModelKind> kinds;
  for (const auto& name : split_list(o.models))
    kinds.push_back(parse_model(name));
  sigproc::validate(ctx.sigproc);
  const auto split = split_spec(ctx);
  tuning::SearchSpec base_spec;
  base_spec.n_iter = o.iters;
  base_spec.n_folds = o.folds;
  base_spec.threads = o.threads;
  tuning::validate(base_spec);
  if (!o.no_bench && (o.reps < 100 || o.warmup < 100))
    throw Error(ErrorCode::InvalidConfig, "--reps and --warmup must be >= 100");

  const bool from_files = !o.ppg.empty() || !o.truth.empty();
  std::vector<synth::SynthConfig> synth_cfgs;
  if (from_files) {
    if (o.ppg.size() != o.truth.size())
      throw Error(ErrorCode::InvalidConfig, "--ppg and --truth must be given the same number of times");
  } else {
    if (o.subjects < 1)
      throw Error(ErrorCode::InvalidConfig, "--subjects must be >= 1");
    const Scenario scenario = parse_scenario_or_throw(o.scenario);
    for (std::size_t s = 0; s < o.subjects; ++s) {
      synth_cfgs.push_back(
          synth::SynthConfig::preset(scenario, o.duration_s, o.fs_hz, derive_seed(ctx.seed, s)));
      synth::validate(synth_cfgs.back());
    }
  }
  const std::size_t n_subjects = from_files ? o.ppg.size() : synth_cfgs.size();

  const fs::path out_dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir / "traces", ec);
  fs::create_directories(out_dir / "models", ec);
  if (ec)
    throw Error(ErrorCode::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::map<std::size_t, std::vector<double>> sigproc_mape;
  std::map<std::pair<models::ModelKind, std::size_t>, Cell> cells;

  for (std::size_t s = 0; s < n_subjects; ++s) {
    Subject subj;
    subj.name = "s" + std::to_string(s + 1);
    if (from_files) {
      subj.ppg = io::read_ppg_csv(o.ppg[s]);
      subj.truth = io::read_hr_csv(o.truth[s]);
    } else {
      auto data = synth::generate(synth_cfgs[s]);
      subj.ppg = std::move(data.ppg);
      subj.truth = std::move(data.truth);
    }
    const auto pphr = sigproc::stage2(subj.ppg, ctx.sigproc);
    io::write_hr_csv(pphr, out_dir / "traces" / (subj.name + "_sigproc.csv"));

    for (const std::size_t k : ks) {
      const auto fm = dataset::build_features(pphr, subj.truth, k);
      const auto [train, test] = dataset::split(fm, split);
      sigproc_mape[k].push_back(eval::mape(eval::baseline_at(test, pphr), test.labels()));

      for (const auto kind : kinds) {
        auto spec = base_spec;
        spec.kind = kind;
        spec.seed = derive_seed(derive_seed(ctx.seed, s), k * 16 + static_cast<std::size_t>(kind));
        const auto search = tuning::random_search(train, spec);
        auto metrics = eval::evaluate(search.model, test, pphr);
        if (!o.no_bench)
          metrics.latency = eval::bench_latency(search.model, test.row(0), o.reps, o.warmup);

        const std::string stem =
            subj.name + "_" + std::string(models::to_string(kind)) + "_k" + std::to_string(k);
        io::write_bytes(out_dir / "models" / (stem + ".bin"), models::serialize(search.model));
        write_trace(out_dir / "traces" / (stem + ".csv"), metrics);

        auto& cell = cells[{kind, k}];
        cell.mape.push_back(metrics.mape_pct);
        cell.size.push_back(*metrics.model_size_bytes);
        if (metrics.latency)
          cell.latency_median.push_back(metrics.latency->median_us);
        cell.hyperparams.push_back(tuning::to_json(search.model.hyperparams()));
        ctx.err << "pipeline: " << subj.name << " k=" << k << " " << models::to_string(kind)
                << " mape=" << fixed(metrics.mape_pct, 2) << "% (sig-proc "
                << fixed(*metrics.baseline_mape_pct, 2) << "%)\n";
      }
    }
  }

  // Reports.
  nlohmann::json j;
  j["subjects"] = n_subjects;
  j["features"] = ks;
  j["split_train_fraction"] = split.train_fraction;
  std::vector<std::pair<std::string, std::vector<std::string>>> mape_rows, size_rows, lat_rows;
  {
    std::vector<std::string> row;
    nlohmann::json js = nlohmann::json::array();
    for (auto k : ks) {
      const auto sum = eval::summarize_subjects(sigproc_mape[k]);
      row.push_back(fixed(sum.mean, 2) + "±" + fixed(sum.sd, 2));
      js.push_back({{"k", k},
                    {"subject_mape_pct", sum.mapes},
                    {"mape_mean_pct", sum.mean},
                    {"mape_sd_pct", sum.sd}});
    }
    mape_rows.emplace_back("Sig-proc", row);
    j["sigproc"] = js;
  }
  nlohmann::json jcells = nlohmann::json::array();
  for (const auto kind : kinds) {
    std::vector<std::string> mrow, srow, lrow;
    for (auto k : ks) {
      const auto& cell = cells.at({kind, k});
      const auto sum = eval::summarize_subjects(cell.mape);
      std::vector<double> sizes(cell.size.begin(), cell.size.end());
      mrow.push_back(fixed(sum.mean, 2) + "±" + fixed(sum.sd, 2));
      srow.push_back(fixed(mean_of(sizes), 0));
      lrow.push_back(cell.latency_median.empty() ? "-" : fixed(mean_of(cell.latency_median), 3));
      nlohmann::json jc{{"model", std::string(models::to_string(kind))},
                        {"k", k},
                        {"subject_mape_pct", sum.mapes},
                        {"mape_mean_pct", sum.mean},
                        {"mape_sd_pct", sum.sd},
                        {"model_size_bytes", cell.size},
                        {"hyperparams", cell.hyperparams}};
      if (!cell.latency_median.empty())
        jc["latency_median_us"] = cell.latency_median;
      jcells.push_back(std::move(jc));
    }
    const std::string name = upper(models::to_string(kind));
    mape_rows.emplace_back(name, mrow);
    size_rows.emplace_back(name, srow);
    lat_rows.emplace_back(name, lrow);
  }
  j["cells"] = jcells;

  const std::string table =
      render_table("Test MAPE % (mean ± SD across " + std::to_string(n_subjects) + " subjects)",
                   ks, mape_rows) +
      "\n" + render_table("Model size (bytes, mean across subjects)", ks, size_rows) + "\n" +
      render_table("Median inference latency (us per reading, mean across subjects)", ks,
                   lat_rows);
  io::write_file(out_dir / "table.txt", table);
  io::write_file(out_dir / "results.json", j.dump(2) + "\n");
  ctx.out << table << "\nwrote " << (out_dir / "table.txt").string() << ", "
          << (out_dir / "results.json").string() << ", traces/ and models/\n";
}

} // namespace pulsehr::cli
