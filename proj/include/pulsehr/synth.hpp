#pragma once

#include "pulsehr/signal_model.hpp"

#include <array>
#include <cstdint>

namespace pulsehr::synth {

/// Harmonic amplitudes of the synthetic pulse; the fundamental dominates.
inline constexpr std::array<double, 3> kPulseHarmonics{1.0, 0.35, 0.12};
inline constexpr double kBaselineWanderHz = 0.1;

struct SynthConfig {
  Scenario scenario = Scenario::daily;
  double duration_s = 600.0;
  double fs_hz = kDefaultPpgRateHz;
  std::uint64_t seed = 42;

  double hr_start_bpm = 75.0;
  double hr_low_bpm = 45.0;
  double hr_high_bpm = 180.0;
  double hr_max_slew_bpm_per_s = 3.0;
  /// Std of the per-second HR step before the scenario variance scale.
  double hr_step_sd_bpm = 1.0;
  /// Variance multiplier for HR steps (sitting 0.2, sleeping 0.1, daily 1).
  double slew_variance_scale = 1.0;
  /// Pull of the walk back towards hr_start_bpm, per second.
  double hr_reversion_per_s = 0.005;

  double noise_std = 0.1;
  double baseline_wander_amp = 0.5;
  double ma_rate_per_min = 4.0;
  double ma_amp = 1.0;
  double ma_dur_s = 2.0;

  /// Scenario preset; only the fields the scenario governs are changed.
  static SynthConfig preset(Scenario scenario, double duration_s = 600.0,
                            double fs_hz = kDefaultPpgRateHz,
                            std::uint64_t seed = 42);
};

/// Throws InvalidConfig naming the first offending field.
void validate(const SynthConfig& cfg);

/// Ground-truth HR at 1 Hz: hr[t+1] = clamp(hr[t] + d, bounds) with
/// |d| <= hr_max_slew_bpm_per_s. Produces ceil(duration_s) + 1 readings so
/// that every PPG sample has a bracketing truth value.
HrSeries gen_truth_hr(const SynthConfig& cfg);

/// Phase-integrated three-harmonic pulse plus baseline wander, white noise
/// and motion-artifact bursts. Single channel, cfg.fs_hz, duration_s long.
PpgRecording gen_ppg(const HrSeries& truth, const SynthConfig& cfg);

struct SynthOutput {
  PpgRecording ppg;
  HrSeries truth;
};

SynthOutput generate(const SynthConfig& cfg);

} // namespace pulsehr::synth
