#include "pulsehr/cli.hpp"
#include "pulsehr/dataset_io.hpp"
#include "pulsehr/error.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/synth.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;
using namespace pulsehr;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "pulsehr");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("pulsehr_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

/// Writes a 600 s daily recording and its truth into `dir`.
void make_data(const TempDir& dir, const std::string& seed = "5") {
  const auto r = run({"synth", "--duration", "600", "--seed", seed, "--out", dir / "ppg.csv",
                      "--truth", dir / "truth.csv"});
  REQUIRE(r.code == 0);
}

} // namespace

TEST_CASE("synth is deterministic and validates input") {
  TempDir dir("synth");
  REQUIRE(run({"synth", "--duration", "30", "--seed", "9", "--out", dir / "a.csv", "--truth",
               dir / "at.csv"})
              .code == 0);
  REQUIRE(run({"synth", "--duration", "30", "--seed", "9", "--out", dir / "b.csv", "--truth",
               dir / "bt.csv"})
              .code == 0);
  CHECK(io::read_file(dir / "a.csv") == io::read_file(dir / "b.csv"));
  CHECK(io::read_file(dir / "at.csv") == io::read_file(dir / "bt.csv"));
  const auto rec = io::read_ppg_csv(fs::path(dir / "a.csv"));
  CHECK(rec.size() == 30 * 25);
  CHECK(io::read_hr_csv(fs::path(dir / "at.csv")).size() == 31);  // truth covers both endpoints

  CHECK(run({"synth", "--duration", "0", "--out", dir / "c.csv", "--truth", dir / "ct.csv"}).code ==
        cli::kExitUsage);
  const auto bad = run({"synth", "--scenario", "jogging", "--out", dir / "c.csv", "--truth",
                        dir / "ct.csv"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("sitting") != std::string::npos);
  CHECK(bad.err.find("daily") != std::string::npos);
}

TEST_CASE("process recovers a clean constant rate") {
  TempDir dir("process");
  synth::SynthConfig cfg;
  cfg.duration_s = 60;
  cfg.noise_std = 0;
  cfg.baseline_wander_amp = 0;
  cfg.ma_rate_per_min = 0;
  const HrSeries truth{1.0, std::vector<double>(61, 72.0), 0.0};
  io::write_ppg_csv(synth::gen_ppg(truth, cfg), fs::path(dir / "clean.csv"));
  const auto r = run({"process", "--in", dir / "clean.csv", "--out", dir / "hr.csv"});
  REQUIRE(r.code == 0);
  const auto hr = io::read_hr_csv(fs::path(dir / "hr.csv"));
  CHECK(hr.size() == 52);
  CHECK(hr.t0_s == 8.0);
  for (double v : hr.values) {
    CHECK(v >= 69.0);
    CHECK(v <= 75.0);
  }

  REQUIRE(run({"synth", "--duration", "5", "--out", dir / "short.csv", "--truth", dir / "st.csv"})
              .code == 0);
  CHECK(run({"process", "--in", dir / "short.csv", "--out", dir / "x.csv"}).code ==
        cli::kExitRuntime);
  CHECK(run({"process", "--in", dir / "missing.csv", "--out", dir / "x.csv"}).code ==
        cli::kExitRuntime);
}

TEST_CASE("train, tune, eval and bench") {
  TempDir dir("models");
  make_data(dir);
  const std::vector<std::string> data{"--ppg", dir / "ppg.csv", "--truth", dir / "truth.csv"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), data.begin(), data.end());
    return run(a);
  };

  REQUIRE(with({"train", "--model", "dt", "--features", "15", "--out", dir / "dt.bin"}).code == 0);
  const auto dt = models::deserialize(io::read_bytes(dir / "dt.bin"));
  CHECK(dt.kind() == models::ModelKind::dt);
  CHECK(dt.k() == 15);

  REQUIRE(with({"train", "--model", "knn", "--features", "6", "--param", "n_neighbors=3", "--param",
                "metric=manhattan", "--out", dir / "knn.bin"})
              .code == 0);
  const auto knn = models::deserialize(io::read_bytes(dir / "knn.bin"));
  CHECK(std::get<models::KnnParams>(knn.hyperparams()) ==
        models::KnnParams{3, models::Metric::manhattan});
  CHECK(with({"train", "--model", "knn", "--param", "bogus=1", "--out", dir / "x.bin"}).code ==
        cli::kExitUsage);
  CHECK(with({"train", "--model", "lstm", "--out", dir / "x.bin"}).code == cli::kExitUsage);

  const std::vector<std::string> tune{"tune", "--model", "dt", "--features", "8", "--iters", "4"};
  auto t = tune;
  t.insert(t.end(), {"--out", dir / "t1.bin", "--report", dir / "r1.json"});
  REQUIRE(with(t).code == 0);
  t = tune;
  t.insert(t.end(), {"--out", dir / "t2.bin", "--report", dir / "r2.json"});
  REQUIRE(with(t).code == 0);
  CHECK(io::read_bytes(dir / "t1.bin") == io::read_bytes(dir / "t2.bin"));
  CHECK(io::read_file(dir / "r1.json") == io::read_file(dir / "r2.json"));
  CHECK(nlohmann::json::parse(io::read_file(dir / "r1.json"))["trials"].size() == 4);
  CHECK(with({"tune", "--model", "dt", "--features", "100", "--folds", "10", "--out",
              dir / "x.bin"})
            .code == cli::kExitRuntime);

  auto r = with({"eval", "--passthrough", "--features", "15"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["mape_pct"] == j["baseline_mape_pct"]);

  r = with({"eval", "--model", dir / "dt.bin"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["model_size_bytes"] == models::model_size(dt));
  CHECK(j["n_rows"].get<std::size_t>() > 0);
  CHECK(with({"eval", "--model", dir / "nope.bin"}).code == cli::kExitRuntime);
  CHECK(with({"eval"}).code == cli::kExitUsage);

  r = run({"bench", "--model", dir / "dt.bin", "--reps", "1000", "--warmup", "100"});
  REQUIRE(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["reps"] == 1000);
  CHECK(j.contains("latency_median_us"));
  CHECK(j.contains("latency_p99_us"));
  CHECK(j["model_size_bytes"] == models::model_size(dt));
  CHECK_FALSE(j.contains("mape_pct"));
  CHECK(run({"bench", "--model", dir / "dt.bin", "--reps", "10"}).code == cli::kExitUsage);
  CHECK(run({"bench", "--model", dir / "nope.bin"}).code == cli::kExitRuntime);
}

TEST_CASE("config files, seeds and usage errors") {
  TempDir dir("config");
  io::write_file(dir / "cfg.txt", "# synthetic run\nduration = 20\nseed=3  # trailing\n\n");
  REQUIRE(run({"synth", "--config", dir / "cfg.txt", "--out", dir / "a.csv", "--truth",
               dir / "at.csv"})
              .code == 0);
  CHECK(io::read_hr_csv(fs::path(dir / "at.csv")).size() == 21);
  REQUIRE(run({"synth", "--config", dir / "cfg.txt", "--duration", "12", "--out", dir / "b.csv",
               "--truth", dir / "bt.csv"})
              .code == 0);
  CHECK(io::read_hr_csv(fs::path(dir / "bt.csv")).size() == 13);
  REQUIRE(run({"synth", "--duration", "20", "--seed", "3", "--out", dir / "c.csv", "--truth",
               dir / "ct.csv"})
              .code == 0);
  CHECK(io::read_file(dir / "a.csv") == io::read_file(dir / "c.csv"));

  io::write_file(dir / "bad.txt", "duration 20\n");
  CHECK(run({"synth", "--config", dir / "bad.txt", "--out", dir / "d.csv", "--truth",
             dir / "dt.csv"})
            .code == cli::kExitUsage);
  CHECK_THROWS_AS(cli::config_args("a=1\nb\n"), Error);
  CHECK(cli::config_args(" a = 1 \n#x\nb=two words\n") ==
        std::vector<std::string>{"--a=1", "--b=two words"});

  ::setenv("PULSEHR_SEED", "3", 1);
  CHECK(cli::default_seed() == 3);
  REQUIRE(run({"synth", "--duration", "20", "--out", dir / "e.csv", "--truth", dir / "et.csv"})
              .code == 0);
  ::setenv("PULSEHR_SEED", "x1", 1);
  CHECK_THROWS_AS(cli::default_seed(), Error);
  ::unsetenv("PULSEHR_SEED");
  CHECK(cli::default_seed() == cli::kDefaultSeed);
  CHECK(io::read_file(dir / "a.csv") == io::read_file(dir / "e.csv"));

  CHECK(run({"synth", "--bogus"}).code == cli::kExitUsage);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"fly"}).code == cli::kExitUsage);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("pipeline") != std::string::npos);
}

TEST_CASE("small pipeline run") {
  TempDir dir("pipeline");
  const std::vector<std::string> args{"pipeline", "--subjects", "2", "--duration", "300",
                                      "--features", "2,4", "--models", "dt,knn", "--iters", "2",
                                      "--folds", "3", "--no-bench"};
  auto a = args;
  a.insert(a.end(), {"--out-dir", dir / "one"});
  const auto r = run(a);
  REQUIRE(r.code == 0);
  const auto table = io::read_file(dir / "one/table.txt");
  CHECK(table.find("Sig-proc") != std::string::npos);
  CHECK(table.find("DT") != std::string::npos);
  CHECK(table.find("KNN") != std::string::npos);
  CHECK(table.find("k=4") != std::string::npos);
  const auto j = nlohmann::json::parse(io::read_file(dir / "one/results.json"));
  CHECK(j["subjects"] == 2);
  CHECK(j["cells"].size() == 4);
  for (const auto& c : j["cells"]) {
    CHECK(c["subject_mape_pct"].size() == 2);
    CHECK(std::isfinite(c["mape_mean_pct"].get<double>()));
  }
  CHECK(fs::exists(dir / "one/models/s2_knn_k4.bin"));
  CHECK(fs::exists(dir / "one/traces/s1_dt_k2.csv"));
  CHECK(fs::exists(dir / "one/traces/s1_sigproc.csv"));

  a = args;
  a.insert(a.end(), {"--out-dir", dir / "two"});
  REQUIRE(run(a).code == 0);
  CHECK(io::read_file(dir / "one/results.json") == io::read_file(dir / "two/results.json"));
  CHECK(io::read_bytes(dir / "one/models/s1_dt_k4.bin") ==
        io::read_bytes(dir / "two/models/s1_dt_k4.bin"));

  a = args;
  a.insert(a.end(), {"--out-dir", dir / "three", "--features", "2,x"});
  CHECK(run(a).code == cli::kExitUsage);
}
