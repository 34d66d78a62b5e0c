#include "pulsehr/signal_model.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pulsehr {

double clamp_hr(double bpm) noexcept {
  return std::clamp(bpm, kMinHrBpm, kMaxHrBpm);
}

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
  case Scenario::sitting: return "sitting";
  case Scenario::sleeping: return "sleeping";
  case Scenario::daily: return "daily";
  }
  return "daily";
}

std::optional<Scenario> parse_scenario(std::string_view name) noexcept {
  if (name == "sitting")
    return Scenario::sitting;
  if (name == "sleeping")
    return Scenario::sleeping;
  if (name == "daily")
    return Scenario::daily;
  return std::nullopt;
}

PpgRecording validate_recording(PpgRecording rec) {
  if (!(rec.fs_hz > 0.0) || !std::isfinite(rec.fs_hz))
    throw Error(ErrorCode::NonPositiveRate,
                "sampling rate must be positive, got " + std::to_string(rec.fs_hz));
  if (rec.channels.empty() || rec.channels.size() > 2)
    throw Error(ErrorCode::InvalidChannels,
                "expected 1 or 2 channels, got " + std::to_string(rec.channels.size()));
  if (!std::isfinite(rec.t0_s))
    throw Error(ErrorCode::NonFiniteSample, "start time is not finite");
  const std::size_t n = rec.channels.front().size();
  if (n == 0)
    throw Error(ErrorCode::InvalidChannels, "channels must hold at least one sample");
  for (std::size_t c = 1; c < rec.channels.size(); ++c)
    if (rec.channels[c].size() != n)
      throw Error(ErrorCode::ChannelLengthMismatch,
                  "channel " + std::to_string(c) + " has " +
                      std::to_string(rec.channels[c].size()) + " samples, expected " +
                      std::to_string(n),
                  c);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& ch : rec.channels)
      if (!std::isfinite(ch[i]))
        throw Error(ErrorCode::NonFiniteSample,
                    "sample " + std::to_string(i) + " is not finite", i);
  return rec;
}

HrSeries validate_hr_series(HrSeries hr) {
  if (!(hr.rate_hz > 0.0) || !std::isfinite(hr.rate_hz))
    throw Error(ErrorCode::NonPositiveRate,
                "HR rate must be positive, got " + std::to_string(hr.rate_hz));
  if (!std::isfinite(hr.t0_s))
    throw Error(ErrorCode::NonFiniteSample, "start time is not finite");
  for (std::size_t i = 0; i < hr.values.size(); ++i) {
    const double v = hr.values[i];
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteSample,
                  "reading " + std::to_string(i) + " is not finite", i);
    if (v < kMinHrBpm || v > kMaxHrBpm)
      throw Error(ErrorCode::HrOutOfRange,
                  "reading " + std::to_string(i) + " = " + std::to_string(v) +
                      " bpm outside [20, 230]",
                  i);
  }
  return hr;
}

const std::vector<double>& select_channel(const PpgRecording& rec,
                                          std::size_t preferred) {
  if (rec.channels.empty())
    throw Error(ErrorCode::InvalidChannels, "recording has no channels");
  if (rec.channels.size() == 1)
    return rec.channels.front();
  if (preferred >= rec.channels.size())
    throw Error(ErrorCode::InvalidChannels,
                "channel " + std::to_string(preferred) + " does not exist");
  return rec.channels[preferred];
}

} // namespace pulsehr
