#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pulsehr {

enum class ErrorCode {
  // signal_model
  NonFiniteSample,
  ChannelLengthMismatch,
  NonPositiveRate,
  InvalidChannels,
  HrOutOfRange,
  // synth / configs
  InvalidConfig,
  // sigproc
  TooFewSamples,
  RecordingTooShort,
  // dataset
  AlignmentError,
  InsufficientData,
  EmptyMatrix,
  // models
  EmptyTrainingSet,
  NotEnoughRows,
  NoConvergence,
  DimensionMismatch,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  CorruptPayload,
  // eval
  LengthMismatch,
  NonPositiveTruth,
  EmptyList,
  // dataset_io
  BadHeader,
  NonUniformSpacing,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. `index` carries the offending sample index, row
/// (1-based line number for file readers) or channel, when one applies.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt,
        std::optional<std::size_t> column = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
  std::optional<std::size_t> column_;
};

} // namespace pulsehr
