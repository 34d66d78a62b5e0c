#include "pulsehr/synth.hpp"

#include "pulsehr/error.hpp"
#include "pulsehr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pulsehr::synth {

namespace {

enum Stream : std::uint64_t { kWalk = 1, kNoise = 2, kArtifact = 3, kWander = 4 };

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok)
    throw Error(ErrorCode::InvalidConfig, field + " " + what);
}

/// Raised-cosine envelope: 0.5 s fade in and out.
double burst_envelope(double t_in_burst, double dur) {
  const double fade = std::min(0.5, dur / 2.0);
  if (fade <= 0.0)
    return 1.0;
  if (t_in_burst < fade)
    return 0.5 - 0.5 * std::cos(std::numbers::pi * t_in_burst / fade);
  if (t_in_burst > dur - fade)
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (dur - t_in_burst) / fade);
  return 1.0;
}

struct Burst {
  double start_s;
  std::array<double, 4> freq_hz;
  std::array<double, 4> phase;
};

} // namespace

SynthConfig SynthConfig::preset(Scenario scenario, double duration_s,
                                double fs_hz, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.scenario = scenario;
  cfg.duration_s = duration_s;
  cfg.fs_hz = fs_hz;
  cfg.seed = seed;
  switch (scenario) {
  case Scenario::sitting:
    cfg.slew_variance_scale = 0.2;
    cfg.ma_rate_per_min = 0.5;
    cfg.hr_start_bpm = 72.0;
    break;
  case Scenario::sleeping:
    cfg.slew_variance_scale = 0.1;
    cfg.ma_rate_per_min = 0.2;
    cfg.hr_start_bpm = 60.0;
    break;
  case Scenario::daily:
    cfg.slew_variance_scale = 1.0;
    cfg.ma_rate_per_min = 4.0;
    cfg.hr_start_bpm = 80.0;
    break;
  }
  return cfg;
}

void validate(const SynthConfig& cfg) {
  require(std::isfinite(cfg.duration_s) && cfg.duration_s > 0.0, "duration_s",
          "must be > 0");
  require(std::isfinite(cfg.fs_hz) && cfg.fs_hz > 0.0, "fs_hz", "must be > 0");
  require(cfg.hr_low_bpm >= kMinHrBpm && cfg.hr_high_bpm <= kMaxHrBpm &&
              cfg.hr_low_bpm <= cfg.hr_high_bpm,
          "hr_bounds_bpm", "must satisfy 20 <= low <= high <= 230");
  require(cfg.hr_start_bpm >= cfg.hr_low_bpm && cfg.hr_start_bpm <= cfg.hr_high_bpm,
          "hr_start_bpm", "must lie within hr_bounds_bpm");
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(non_negative(cfg.hr_max_slew_bpm_per_s), "hr_max_slew_bpm_per_s", "must be >= 0");
  require(non_negative(cfg.hr_step_sd_bpm), "hr_step_sd_bpm", "must be >= 0");
  require(non_negative(cfg.slew_variance_scale), "slew_variance_scale", "must be >= 0");
  require(non_negative(cfg.hr_reversion_per_s) && cfg.hr_reversion_per_s <= 1.0,
          "hr_reversion_per_s", "must be in [0, 1]");
  require(non_negative(cfg.noise_std), "noise_std", "must be >= 0");
  require(non_negative(cfg.baseline_wander_amp), "baseline_wander_amp", "must be >= 0");
  require(non_negative(cfg.ma_rate_per_min), "ma_rate_per_min", "must be >= 0");
  require(non_negative(cfg.ma_amp), "ma_amp", "must be >= 0");
  require(non_negative(cfg.ma_dur_s), "ma_dur_s", "must be >= 0");
}

HrSeries gen_truth_hr(const SynthConfig& cfg) {
  validate(cfg);
  const auto n = static_cast<std::size_t>(std::ceil(cfg.duration_s)) + 1;
  Rng rng(derive_seed(cfg.seed, kWalk));
  const double step_sd = cfg.hr_step_sd_bpm * std::sqrt(cfg.slew_variance_scale);
  const double slew = cfg.hr_max_slew_bpm_per_s;

  HrSeries hr{1.0, {}, 0.0};
  hr.values.reserve(n);
  double current = cfg.hr_start_bpm;
  hr.values.push_back(current);
  for (std::size_t t = 1; t < n; ++t) {
    const double pull = -cfg.hr_reversion_per_s * (current - cfg.hr_start_bpm);
    const double step = std::clamp(pull + step_sd * rng.normal(), -slew, slew);
    current = std::clamp(current + step, cfg.hr_low_bpm, cfg.hr_high_bpm);
    hr.values.push_back(current);
  }
  return hr;
}

PpgRecording gen_ppg(const HrSeries& truth, const SynthConfig& cfg) {
  validate(cfg);
  if (std::abs(truth.rate_hz - 1.0) > 1e-12 || truth.values.empty())
    throw Error(ErrorCode::InvalidConfig, "truth series must be non-empty and at 1 Hz");

  const double fs = cfg.fs_hz;
  const auto n = static_cast<std::size_t>(std::llround(std::floor(cfg.duration_s * fs + 1e-9)));
  if (n == 0)
    throw Error(ErrorCode::InvalidConfig, "duration_s * fs_hz yields no samples");

  auto hr_at = [&](double t) {
    const double pos = t - truth.t0_s;
    if (pos <= 0.0)
      return truth.values.front();
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= truth.values.size())
      return truth.values.back();
    const double frac = pos - static_cast<double>(i);
    return truth.values[i] + frac * (truth.values[i + 1] - truth.values[i]);
  };

  Rng noise_rng(derive_seed(cfg.seed, kNoise));
  Rng burst_rng(derive_seed(cfg.seed, kArtifact));
  Rng wander_rng(derive_seed(cfg.seed, kWander));
  const double wander_phase = wander_rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<Burst> bursts;
  if (cfg.ma_rate_per_min > 0.0 && cfg.ma_amp > 0.0 && cfg.ma_dur_s > 0.0) {
    const double rate_per_s = cfg.ma_rate_per_min / 60.0;
    double t = burst_rng.exponential(rate_per_s);
    while (t < cfg.duration_s) {
      Burst b{t, {}, {}};
      for (std::size_t j = 0; j < b.freq_hz.size(); ++j) {
        b.freq_hz[j] = burst_rng.uniform(0.5, 3.5);
        b.phase[j] = burst_rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
      bursts.push_back(b);
      t += burst_rng.exponential(rate_per_s);
    }
  }
  // Each component gets amplitude so the burst RMS equals ma_amp.
  const double component_amp = cfg.ma_amp * std::sqrt(2.0 / 4.0);

  std::vector<double> samples(n);
  double phase = 0.0;
  double prev_hr = hr_at(truth.t0_s);
  std::size_t first_live_burst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = truth.t0_s + static_cast<double>(i) / fs;
    const double cur_hr = hr_at(t);
    if (i > 0)
      phase += 2.0 * std::numbers::pi * 0.5 * (prev_hr + cur_hr) / 60.0 / fs;
    prev_hr = cur_hr;

    double v = 0.0;
    for (std::size_t m = 0; m < kPulseHarmonics.size(); ++m)
      v += kPulseHarmonics[m] * std::sin(static_cast<double>(m + 1) * phase);
    if (cfg.baseline_wander_amp > 0.0)
      v += cfg.baseline_wander_amp *
           std::sin(2.0 * std::numbers::pi * kBaselineWanderHz * (t - truth.t0_s) + wander_phase);
    if (cfg.noise_std > 0.0)
      v += cfg.noise_std * noise_rng.normal();

    const double rel = t - truth.t0_s;
    while (first_live_burst < bursts.size() &&
           bursts[first_live_burst].start_s + cfg.ma_dur_s < rel)
      ++first_live_burst;
    for (std::size_t b = first_live_burst; b < bursts.size() && bursts[b].start_s <= rel; ++b) {
      const double in_burst = rel - bursts[b].start_s;
      if (in_burst > cfg.ma_dur_s)
        continue;
      double ma = 0.0;
      for (std::size_t j = 0; j < bursts[b].freq_hz.size(); ++j)
        ma += std::sin(2.0 * std::numbers::pi * bursts[b].freq_hz[j] * in_burst + bursts[b].phase[j]);
      v += component_amp * burst_envelope(in_burst, cfg.ma_dur_s) * ma;
    }
    samples[i] = v;
  }

  PpgRecording rec;
  rec.fs_hz = fs;
  rec.t0_s = truth.t0_s;
  rec.channels.push_back(std::move(samples));
  return rec;
}

SynthOutput generate(const SynthConfig& cfg) {
  HrSeries truth = gen_truth_hr(cfg);
  PpgRecording ppg = gen_ppg(truth, cfg);
  return {std::move(ppg), std::move(truth)};
}

} // namespace pulsehr::synth
