#include "oracles.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/rng.hpp"
#include "pulsehr/sigproc.hpp"
#include "pulsehr/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace pulsehr;
using sigproc::SigprocConfig;

namespace {

std::vector<double> sine(double hz, double fs, double seconds, double amp = 1.0) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * fs)));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  return x;
}

PpgRecording clean_recording(double bpm, double seconds, double fs = 25.0) {
  synth::SynthConfig cfg;
  cfg.duration_s = seconds;
  cfg.fs_hz = fs;
  cfg.noise_std = 0.0;
  cfg.baseline_wander_amp = 0.0;
  cfg.ma_rate_per_min = 0.0;
  const HrSeries truth{1.0, std::vector<double>(static_cast<std::size_t>(seconds) + 1, bpm), 0.0};
  return synth::gen_ppg(truth, cfg);
}

std::vector<std::size_t> oracle_peaks(const std::vector<double>& x, double fs,
                                      const SigprocConfig& cfg = {}) {
  const auto half = static_cast<std::size_t>(std::llround(cfg.detrend_window_s * fs)) / 2;
  return oracle::peaks(x, half, cfg.min_prominence_factor,
                       static_cast<std::size_t>(std::floor(fs * 60.0 / cfg.max_hr_bpm)));
}

HrSeries four_hz(std::vector<double> v) { return HrSeries{4.0, std::move(v), 0.0}; }
HrSeries one_hz(std::vector<double> v) { return HrSeries{1.0, std::move(v), 0.0}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

} // namespace

TEST_CASE("sine at 1.2 Hz: 12 peaks about 20.83 samples apart") {
  const auto x = sine(1.2, 25, 10);
  const auto p = sigproc::detect_peaks(x, 25);
  REQUIRE(p.size() == 12);
  for (std::size_t i = 1; i < p.size(); ++i)
    CHECK(std::abs(static_cast<double>(p[i] - p[i - 1]) - 25.0 / 1.2) <= 1.0);
  CHECK(p == oracle_peaks(x, 25));
}

TEST_CASE("constant signal has no peaks") {
  const std::vector<double> x(250, 3.5);
  CHECK(sigproc::detect_peaks(x, 25).empty());
}

TEST_CASE("spike inside the refractory distance of a true peak") {
  auto x = sine(1.2, 25, 10);
  const std::size_t true_peak = 26; // second maximum near sample 26.04
  x[true_peak + 3] += 50.0;         // three samples later, refractory is 6
  const auto p = sigproc::detect_peaks(x, 25);
  CHECK(p.size() <= 13);
  CHECK(p == oracle_peaks(x, 25));
  // The spike is higher, so it wins and the true peak next to it is dropped.
  CHECK(std::find(p.begin(), p.end(), true_peak + 3) != p.end());
  CHECK(std::find(p.begin(), p.end(), true_peak) == p.end());
}

TEST_CASE("detect_peaks matches the brute-force rules on random short arrays") {
  Rng rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 3 + rng.index(198);
    const double fs = trial % 3 == 0 ? 125.0 : 25.0;
    std::vector<double> x(n);
    const double hz = rng.uniform(0.5, 3.5);
    const int style = trial % 4;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      switch (style) {
      case 0: x[i] = rng.normal(); break;
      case 1: x[i] = std::sin(2 * std::numbers::pi * hz * t) + 0.3 * rng.normal(); break;
      case 2: x[i] = std::round(3 * std::sin(2 * std::numbers::pi * hz * t)); break; // plateaus
      default: x[i] = static_cast<double>(rng.uniform_int(0, 3)); break;            // many ties
      }
    }
    SigprocConfig cfg;
    cfg.min_prominence_factor = rng.uniform(0.0, 1.0);
    cfg.max_hr_bpm = rng.uniform(60.0, 230.0);
    const auto got = sigproc::detect_peaks(x, fs, cfg);
    REQUIRE(got == oracle_peaks(x, fs, cfg));
  }
}

TEST_CASE("kept peaks satisfy the local-max, separation and dominance rules") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(200);
    for (auto& v : x)
      v = rng.normal();
    const SigprocConfig cfg;
    const auto p = sigproc::detect_peaks(x, 25, cfg);
    const auto d = sigproc::detrend(x, 25, cfg.detrend_window_s);
    const auto dist = sigproc::refractory_samples(25, cfg.max_hr_bpm);
    const double need = cfg.min_prominence_factor * oracle::population_sd(d);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(d[p[i]] > d[p[i] - 1]);
      CHECK(d[p[i]] > d[p[i] + 1]);
      CHECK(oracle::prominence(d, p[i]) >= need);
      if (i > 0)
        CHECK(p[i] - p[i - 1] >= dist);
    }
    // Every dropped candidate sits near a kept peak that outranks it.
    for (std::size_t c = 1; c + 1 < d.size(); ++c) {
      if (!(d[c] > d[c - 1] && d[c] > d[c + 1]) || oracle::prominence(d, c) < need ||
          std::find(p.begin(), p.end(), c) != p.end())
        continue;
      bool dominated = false;
      for (auto k : p) {
        const std::size_t gap = k > c ? k - c : c - k;
        if (gap < dist && (d[k] > d[c] || (d[k] == d[c] && k < c)))
          dominated = true;
      }
      CHECK(dominated);
    }
  }
}

TEST_CASE("detrend matches the direct moving average") {
  Rng rng(3);
  std::vector<double> x(97);
  for (auto& v : x)
    v = rng.normal(5.0, 2.0);
  const auto got = sigproc::detrend(x, 25, 1.0);
  const auto want = oracle::detrend(x, 12);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("peak detection preconditions") {
  const std::vector<double> two{1.0, 2.0};
  CHECK(code_of([&] { sigproc::detect_peaks(two, 25); }) == ErrorCode::TooFewSamples);
  CHECK(sigproc::refractory_samples(25, 220) == 6);
  CHECK(sigproc::refractory_samples(125, 220) == 34);
}

TEST_CASE("initial HR on clean 72 bpm stays within 3 bpm") {
  const auto hr = sigproc::initial_hr(clean_recording(72, 60));
  CHECK(hr.rate_hz == 4.0);
  CHECK(hr.t0_s == 8.0);
  for (double v : hr.values) {
    CHECK(v >= 69.0);
    CHECK(v <= 75.0);
  }
}

TEST_CASE("initial HR needs a full window") {
  const auto rec = clean_recording(72, 7.9);
  CHECK(code_of([&] { sigproc::initial_hr(rec); }) == ErrorCode::RecordingTooShort);
  CHECK(code_of([&] { sigproc::stage2(rec); }) == ErrorCode::RecordingTooShort);
}

TEST_CASE("flat windows repeat the previous reading") {
  auto rec = clean_recording(90, 40);
  auto& x = rec.channels[0];
  for (std::size_t i = 500; i < x.size(); ++i)
    x[i] = 0.0; // flatline from t = 20 s
  const auto hr = sigproc::initial_hr(rec);
  // Windows starting at or after 20 s see no peaks at all.
  const std::size_t first_flat = (20 - 0) * 4; // window start 20 s -> reading (20-0)/0.25 = 80
  REQUIRE(hr.size() > first_flat);
  for (std::size_t j = first_flat; j < hr.size(); ++j)
    CHECK(hr.values[j] == hr.values[first_flat - 1]);

  PpgRecording flat{25.0, {std::vector<double>(300, 1.0)}, 0.0};
  for (double v : sigproc::initial_hr(flat).values)
    CHECK(v == kFallbackHrBpm);
}

TEST_CASE("reading counts follow the window arithmetic") {
  for (double fs : {25.0, 125.0}) {
    for (double seconds : {8.0, 9.0, 10.5, 60.0, 61.3}) {
      const auto n = static_cast<std::size_t>(std::llround(std::floor(seconds * fs)));
      // window j covers samples [floor(j * fs / 4), floor(j * fs / 4) + 8 fs)
      std::size_t expect_initial = 0;
      while (static_cast<std::size_t>(std::floor(static_cast<double>(expect_initial) * fs / 4.0)) +
                 static_cast<std::size_t>(8.0 * fs) <=
             n)
        ++expect_initial;
      CHECK(sigproc::initial_reading_count(n, fs) == expect_initial);
      const auto rec = clean_recording(72, seconds, fs);
      REQUIRE(rec.size() == n);
      CHECK(sigproc::initial_hr(rec).size() == expect_initial);
      CHECK(sigproc::stage2(rec).size() == expect_initial / 4);
    }
  }
  // An N-second recording yields exactly N - window seconds of output.
  CHECK(sigproc::stage2(clean_recording(72, 100)).size() == 92);
}

TEST_CASE("z-score filter examples") {
  const SigprocConfig cfg;
  const auto flat = four_hz(std::vector<double>(200, 70.0));
  CHECK(sigproc::zscore_filter(flat, cfg) == flat);

  std::vector<double> v(119, 70.0);
  v.push_back(200.0);
  v.push_back(70.0);
  const auto out = sigproc::zscore_filter(four_hz(v), cfg);
  CHECK(out.values[119] == 70.0);
  CHECK(out.size() == v.size());

  std::vector<double> gentle;
  for (int i = 0; i < 100; ++i)
    gentle.push_back(70.0 + std::sin(i * 0.3));
  CHECK(sigproc::zscore_filter(four_hz(gentle), cfg).values == gentle);
}

TEST_CASE("z-score filter: hand-computed spike and endpoint rules") {
  SigprocConfig cfg;
  // 9 readings: 8 x 70 then a spike at the end. Window mean 84.44..,
  // population sd 40.86; z = 2.83 -> kept at threshold 3, replaced at 2.5.
  std::vector<double> v(8, 70.0);
  v.push_back(200.0);
  CHECK(sigproc::zscore_filter(four_hz(v), cfg).values == v);
  cfg.z_threshold = 2.5;
  const auto out = sigproc::zscore_filter(four_hz(v), cfg).values;
  CHECK(out.back() == 70.0); // endpoint: single neighbour

  // Inactive until 8 readings are in the window.
  std::vector<double> early{70, 70, 70, 70, 70, 70, 200, 70};
  CHECK(sigproc::zscore_filter(four_hz(early), cfg).values[6] == 200.0);
}

TEST_CASE("z-score replacement uses the corrected predecessor") {
  SigprocConfig cfg;
  cfg.z_window_readings = 20;
  std::vector<double> v(30, 80.0);
  v[25] = 150.0;
  v[26] = 90.0;
  const auto out = sigproc::zscore_filter(four_hz(v), cfg).values;
  CHECK(out[25] == doctest::Approx(0.5 * (80.0 + 90.0)));
}

TEST_CASE("per-second smoothing") {
  CHECK(sigproc::smooth_per_second(four_hz({72, 72, 72, 72})).values == std::vector<double>{72});
  CHECK(sigproc::smooth_per_second(four_hz({70, 72, 74, 76})).values == std::vector<double>{73});
  const auto nine = sigproc::smooth_per_second(four_hz({1, 2, 3, 4, 5, 6, 7, 8, 9}));
  CHECK(nine.size() == 2);
  CHECK(nine.rate_hz == 1.0);
}

TEST_CASE("clamp smoothing") {
  const SigprocConfig cfg;
  CHECK(sigproc::clamp_smooth(one_hz({100, 110}), cfg).values[1] == doctest::Approx(105));
  CHECK(sigproc::clamp_smooth(one_hz({100, 103}), cfg).values[1] == 103);
  const auto ramp = sigproc::clamp_smooth(one_hz({100, 120, 140}), cfg).values;
  CHECK(ramp[0] == 100);
  CHECK(ramp[1] == doctest::Approx(105));
  CHECK(ramp[2] == doctest::Approx(110.25));
  const auto down = sigproc::clamp_smooth(one_hz({100, 50}), cfg).values;
  CHECK(down[1] == doctest::Approx(95));
}

TEST_CASE("stage2 on clean input at several constant rates") {
  for (double bpm : {50.0, 72.0, 120.0, 180.0}) {
    const auto out = sigproc::stage2(clean_recording(bpm, 120));
    REQUIRE(out.size() == 112);
    for (double v : out.values)
      CHECK(std::abs(v - bpm) <= 3.0);
  }
}

TEST_CASE("stage2 on noisy daily data keeps clamp and range invariants") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = synth::generate(synth::SynthConfig::preset(Scenario::daily, 900, 25, seed));
    const auto out = sigproc::stage2(data.ppg);
    const auto again = sigproc::stage2(data.ppg);
    CHECK(out == again);
    for (std::size_t t = 0; t < out.size(); ++t) {
      REQUIRE(out.values[t] >= kMinHrBpm);
      REQUIRE(out.values[t] <= kMaxHrBpm);
      if (t > 0)
        REQUIRE(std::abs(out.values[t] - out.values[t - 1]) <=
                0.05 * out.values[t - 1] + 1e-9);
    }
  }
}

TEST_CASE("stage2 uses the configured channel") {
  auto rec = clean_recording(60, 30);
  const auto fast = clean_recording(120, 30);
  rec.channels.push_back(fast.channels[0]);
  SigprocConfig cfg;
  CHECK(sigproc::stage2(rec, cfg).values.back() == doctest::Approx(120).epsilon(0.03));
  cfg.channel = 0;
  CHECK(sigproc::stage2(rec, cfg).values.back() == doctest::Approx(60).epsilon(0.03));
}

TEST_CASE("sigproc config validation") {
  const auto invalid = [](auto mutate) {
    SigprocConfig cfg;
    mutate(cfg);
    return code_of([&] { sigproc::validate(cfg); }) == ErrorCode::InvalidConfig;
  };
  CHECK(invalid([](SigprocConfig& c) { c.window_s = 4; }));
  CHECK(invalid([](SigprocConfig& c) { c.hop_s = 0.3; }));
  CHECK(invalid([](SigprocConfig& c) { c.z_threshold = 0; }));
  CHECK(invalid([](SigprocConfig& c) { c.clamp_bound = 1.0; }));
  CHECK(invalid([](SigprocConfig& c) { c.clamp_bound = 0.0; }));
  CHECK_FALSE(invalid([](SigprocConfig&) {}));
}
