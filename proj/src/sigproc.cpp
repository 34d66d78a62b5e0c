#include "pulsehr/sigproc.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pulsehr::sigproc {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok)
    throw Error(ErrorCode::InvalidConfig, field + " " + what);
}

std::size_t window_samples(double fs_hz, const SigprocConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.window_s * fs_hz));
}

/// End (exclusive) sample index of every analysis window that fits.
std::vector<std::size_t> window_ends(std::size_t n_samples, double fs_hz,
                                     const SigprocConfig& cfg) {
  std::vector<std::size_t> ends;
  const std::size_t first = window_samples(fs_hz, cfg);
  if (first > n_samples || first == 0)
    return ends;
  const double hop = cfg.hop_s * fs_hz;
  for (std::size_t j = 0;; ++j) {
    const std::size_t end =
        first + static_cast<std::size_t>(std::floor(static_cast<double>(j) * hop + 1e-9));
    if (end > n_samples)
      break;
    ends.push_back(end);
  }
  return ends;
}

} // namespace

std::size_t SigprocConfig::readings_per_second() const {
  return static_cast<std::size_t>(std::llround(1.0 / hop_s));
}

void validate(const SigprocConfig& cfg) {
  require(std::isfinite(cfg.window_s) && cfg.window_s >= 2.0 * 60.0 / 20.0, "window_s",
          "must be >= 6 s (two beats at 20 bpm)");
  require(std::isfinite(cfg.hop_s) && cfg.hop_s > 0.0 && cfg.hop_s <= 1.0, "hop_s",
          "must be in (0, 1]");
  const double per_second = 1.0 / cfg.hop_s;
  require(std::abs(per_second - std::round(per_second)) < 1e-9, "hop_s",
          "must divide one second into a whole number of readings");
  require(std::isfinite(cfg.detrend_window_s) && cfg.detrend_window_s > 0.0,
          "detrend_window_s", "must be > 0");
  require(std::isfinite(cfg.min_prominence_factor) && cfg.min_prominence_factor >= 0.0,
          "min_prominence_factor", "must be >= 0");
  require(cfg.max_hr_bpm >= kMinHrBpm && cfg.max_hr_bpm <= kMaxHrBpm, "max_hr_bpm",
          "must be within [20, 230]");
  require(std::isfinite(cfg.z_threshold) && cfg.z_threshold > 0.0, "z_threshold",
          "must be > 0");
  require(cfg.z_window_readings >= 2, "z_window_readings", "must be >= 2");
  require(cfg.clamp_bound > 0.0 && cfg.clamp_bound < 1.0, "clamp_bound",
          "must be in (0, 1)");
}

std::vector<double> detrend(std::span<const double> samples, double fs_hz,
                            double window_s) {
  const std::size_t n = samples.size();
  const auto half = static_cast<std::size_t>(std::llround(window_s * fs_hz)) / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    prefix[i + 1] = prefix[i] + samples[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = samples[i] - (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

double prominence(std::span<const double> x, std::size_t peak) {
  const double height = x[peak];
  double left_min = height;
  for (std::size_t j = peak; j-- > 0;) {
    if (x[j] > height)
      break;
    left_min = std::min(left_min, x[j]);
  }
  double right_min = height;
  for (std::size_t j = peak + 1; j < x.size(); ++j) {
    if (x[j] > height)
      break;
    right_min = std::min(right_min, x[j]);
  }
  return height - std::max(left_min, right_min);
}

std::size_t refractory_samples(double fs_hz, double max_hr_bpm) {
  return static_cast<std::size_t>(std::floor(fs_hz * 60.0 / max_hr_bpm));
}

std::vector<std::size_t> detect_peaks(std::span<const double> samples, double fs_hz,
                                      const SigprocConfig& cfg) {
  if (samples.size() < 3)
    throw Error(ErrorCode::TooFewSamples,
                "peak detection needs >= 3 samples, got " + std::to_string(samples.size()));
  if (!(fs_hz > 0.0))
    throw Error(ErrorCode::NonPositiveRate, "sampling rate must be positive");

  const std::vector<double> d = detrend(samples, fs_hz, cfg.detrend_window_s);
  const double n = static_cast<double>(d.size());
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : d)
    ss += (v - mean) * (v - mean);
  const double min_prominence = cfg.min_prominence_factor * std::sqrt(ss / n);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < d.size(); ++i)
    if (d[i] > d[i - 1] && d[i] > d[i + 1] && prominence(d, i) >= min_prominence)
      candidates.push_back(i);

  const std::size_t distance = refractory_samples(fs_hz, cfg.max_hr_bpm);
  if (distance <= 1 || candidates.size() < 2)
    return candidates;

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d[candidates[a]] > d[candidates[b]];
  });
  std::vector<bool> removed(candidates.size(), false);
  for (std::size_t c : order) {
    if (removed[c])
      continue;
    for (std::size_t j = c; j-- > 0 && candidates[c] - candidates[j] < distance;)
      removed[j] = true;
    for (std::size_t j = c + 1; j < candidates.size() && candidates[j] - candidates[c] < distance; ++j)
      removed[j] = true;
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (!removed[c])
      kept.push_back(candidates[c]);
  return kept;
}

std::size_t initial_reading_count(std::size_t n_samples, double fs_hz,
                                  const SigprocConfig& cfg) {
  return window_ends(n_samples, fs_hz, cfg).size();
}

HrSeries initial_hr(const PpgRecording& rec, const SigprocConfig& cfg) {
  validate(cfg);
  const auto& samples = select_channel(rec, cfg.channel);
  const std::size_t width = window_samples(rec.fs_hz, cfg);
  if (samples.size() < width)
    throw Error(ErrorCode::RecordingTooShort,
                "recording lasts " + std::to_string(rec.duration_s()) +
                    " s, shorter than the " + std::to_string(cfg.window_s) + " s window");

  HrSeries out;
  out.rate_hz = static_cast<double>(cfg.readings_per_second());
  out.t0_s = rec.t0_s + cfg.window_s;
  const auto ends = window_ends(samples.size(), rec.fs_hz, cfg);
  out.values.reserve(ends.size());
  double previous = kFallbackHrBpm;
  const std::span<const double> all(samples);
  for (std::size_t end : ends) {
    const auto peaks = detect_peaks(all.subspan(end - width, width), rec.fs_hz, cfg);
    if (peaks.size() >= 2) {
      const double interval_s = static_cast<double>(peaks.back() - peaks.front()) /
                                static_cast<double>(peaks.size() - 1) / rec.fs_hz;
      previous = clamp_hr(60.0 / interval_s);
    }
    out.values.push_back(previous);
  }
  return out;
}

HrSeries zscore_filter(const HrSeries& hr, const SigprocConfig& cfg) {
  HrSeries out = hr;
  const auto& x = hr.values;
  auto& y = out.values;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i + 1 > cfg.z_window_readings ? i + 1 - cfg.z_window_readings : 0;
    const std::size_t count = i - start + 1;
    if (count < kZMinReadings)
      continue;
    double mean = 0.0;
    for (std::size_t j = start; j <= i; ++j)
      mean += x[j];
    mean /= static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t j = start; j <= i; ++j)
      ss += (x[j] - mean) * (x[j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(count));
    if (!(sd > 0.0) || std::abs(x[i] - mean) / sd <= cfg.z_threshold)
      continue;
    const bool has_next = i + 1 < n;
    if (i > 0 && has_next)
      y[i] = 0.5 * (y[i - 1] + x[i + 1]);
    else if (i > 0)
      y[i] = y[i - 1];
    else if (has_next)
      y[i] = x[i + 1];
  }
  return out;
}

HrSeries smooth_per_second(const HrSeries& hr) {
  const auto group = static_cast<std::size_t>(std::llround(hr.rate_hz));
  if (group == 0 || std::abs(hr.rate_hz - static_cast<double>(group)) > 1e-9)
    throw Error(ErrorCode::InvalidConfig,
                "per-second smoothing needs an integer reading rate, got " +
                    std::to_string(hr.rate_hz));
  HrSeries out;
  out.rate_hz = 1.0;
  out.t0_s = hr.t0_s;
  const std::size_t seconds = hr.values.size() / group;
  out.values.reserve(seconds);
  for (std::size_t s = 0; s < seconds; ++s) {
    double sum = 0.0;
    for (std::size_t j = 0; j < group; ++j)
      sum += hr.values[s * group + j];
    out.values.push_back(sum / static_cast<double>(group));
  }
  return out;
}

HrSeries clamp_smooth(const HrSeries& hr, const SigprocConfig& cfg) {
  HrSeries out = hr;
  auto& y = out.values;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double prev = y[t - 1];
    y[t] = std::clamp(hr.values[t], prev * (1.0 - cfg.clamp_bound),
                      prev * (1.0 + cfg.clamp_bound));
  }
  return out;
}

HrSeries stage2(const PpgRecording& rec, const SigprocConfig& cfg) {
  return clamp_smooth(smooth_per_second(zscore_filter(initial_hr(rec, cfg), cfg)), cfg);
}

} // namespace pulsehr::sigproc
