#pragma once

#include "pulsehr/signal_model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pulsehr::io {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// PPG CSV: header `t_s,ch1` or `t_s,ch1,ch2`, one row per sample, LF line
/// endings. The rate is inferred from the timestamps (snapped to the
/// nearest integer when within 1e-6 Hz); a single-row file uses 25 Hz.
/// Throws BadHeader, NonUniformSpacing, ParseError (index = 1-based line,
/// column = 1-based field) or IoError.
PpgRecording read_ppg_csv(std::istream& in);
PpgRecording read_ppg_csv(const std::filesystem::path& path);
std::string write_ppg_csv(const PpgRecording& rec);
void write_ppg_csv(const PpgRecording& rec, const std::filesystem::path& path);

/// HR CSV: header `t_s,hr_bpm`. A single-row file is taken as 1 Hz. Values
/// outside [20, 230] bpm throw HrOutOfRange with the line number.
HrSeries read_hr_csv(std::istream& in);
HrSeries read_hr_csv(const std::filesystem::path& path);
std::string write_hr_csv(const HrSeries& hr);
void write_hr_csv(const HrSeries& hr, const std::filesystem::path& path);

/// Whole-file helpers; both throw IoError.
std::string read_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> data);

} // namespace pulsehr::io
