#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace pulsehr {

inline constexpr double kMinHrBpm = 20.0;
inline constexpr double kMaxHrBpm = 230.0;
inline constexpr double kDefaultPpgRateHz = 25.0;
/// Stand-in reading when no estimate is available yet.
inline constexpr double kFallbackHrBpm = 70.0;

/// Clamp an HR value into the plausible physiological range.
double clamp_hr(double bpm) noexcept;

/// Uniformly sampled PPG light channels (red and/or infrared).
struct PpgRecording {
  double fs_hz = kDefaultPpgRateHz;
  std::vector<std::vector<double>> channels;
  double t0_s = 0.0;

  std::size_t size() const noexcept {
    return channels.empty() ? 0 : channels.front().size();
  }
  double duration_s() const noexcept {
    return static_cast<double>(size()) / fs_hz;
  }
  bool operator==(const PpgRecording&) const = default;
};

/// Uniformly spaced HR readings in bpm. Stage-2 emits 4 Hz then 1 Hz series.
struct HrSeries {
  double rate_hz = 1.0;
  std::vector<double> values;
  double t0_s = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double time_at(std::size_t i) const noexcept {
    return t0_s + static_cast<double>(i) / rate_hz;
  }
  bool operator==(const HrSeries&) const = default;
};

enum class Scenario { sitting, sleeping, daily };

std::string_view to_string(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view name) noexcept;

/// Returns the recording unchanged when fs_hz > 0, there are 1-2 channels
/// of equal non-zero length and every sample is finite. Throws
/// NonPositiveRate, InvalidChannels, ChannelLengthMismatch (index = channel)
/// or NonFiniteSample (index = sample).
PpgRecording validate_recording(PpgRecording rec);

/// Checks rate_hz > 0 and every value finite and within [20, 230] bpm.
/// Throws NonPositiveRate, NonFiniteSample or HrOutOfRange (index = reading).
HrSeries validate_hr_series(HrSeries hr);

/// Picks the channel driving Stage 2. Single-channel recordings always use
/// channel 0; otherwise `preferred` (default 1, infrared) must exist.
const std::vector<double>& select_channel(const PpgRecording& rec,
                                          std::size_t preferred = 1);

} // namespace pulsehr
