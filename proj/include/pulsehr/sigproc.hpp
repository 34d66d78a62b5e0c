#pragma once

#include "pulsehr/signal_model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pulsehr::sigproc {

/// The z-score filter stays inactive until its window holds this many readings.
inline constexpr std::size_t kZMinReadings = 8;

struct SigprocConfig {
  double window_s = 8.0;
  double hop_s = 0.25;
  double detrend_window_s = 1.0;
  double min_prominence_factor = 0.5;
  double max_hr_bpm = 220.0;
  double z_threshold = 3.0;
  std::size_t z_window_readings = 120;
  double clamp_bound = 0.05;
  /// Channel used when the recording carries two (1 = infrared).
  std::size_t channel = 1;

  /// Initial readings per second, 1 / hop_s.
  std::size_t readings_per_second() const;
};

/// Throws InvalidConfig naming the first offending field.
void validate(const SigprocConfig& cfg);

/// Centered moving-average detrend (window truncated at the edges).
std::vector<double> detrend(std::span<const double> samples, double fs_hz,
                            double window_s);

/// Topographic prominence of sample `peak` in `x`.
double prominence(std::span<const double> x, std::size_t peak);

/// Minimum peak separation in samples: floor(fs * 60 / max_hr_bpm).
std::size_t refractory_samples(double fs_hz, double max_hr_bpm);

/// Strict local maxima of the detrended signal with prominence at least
/// min_prominence_factor * std(detrended), thinned so kept peaks are at
/// least refractory_samples apart. Thinning keeps higher peaks first and
/// the earlier of equal heights. Result is ascending.
std::vector<std::size_t> detect_peaks(std::span<const double> samples, double fs_hz,
                                      const SigprocConfig& cfg = {});

/// Sliding-window peak-interval HR at 1/hop_s readings per second.
/// Reading j covers the window_s seconds ending at t0 + window_s + j*hop_s.
HrSeries initial_hr(const PpgRecording& rec, const SigprocConfig& cfg = {});

/// Number of initial readings for a recording of n samples at fs_hz.
std::size_t initial_reading_count(std::size_t n_samples, double fs_hz,
                                  const SigprocConfig& cfg = {});

/// Replaces trailing-window |z| > z_threshold readings with the mean of
/// their neighbours. Length preserved.
HrSeries zscore_filter(const HrSeries& hr, const SigprocConfig& cfg = {});

/// Averages each complete group of readings_per_second readings.
HrSeries smooth_per_second(const HrSeries& hr);

/// Rate-limits each reading to +/- clamp_bound of the previous output.
HrSeries clamp_smooth(const HrSeries& hr, const SigprocConfig& cfg = {});

/// initial_hr -> zscore_filter -> smooth_per_second -> clamp_smooth.
HrSeries stage2(const PpgRecording& rec, const SigprocConfig& cfg = {});

} // namespace pulsehr::sigproc
