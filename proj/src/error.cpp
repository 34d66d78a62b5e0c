#include "pulsehr/error.hpp"

namespace pulsehr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::NonFiniteSample: return "NonFiniteSample";
  case ErrorCode::ChannelLengthMismatch: return "ChannelLengthMismatch";
  case ErrorCode::NonPositiveRate: return "NonPositiveRate";
  case ErrorCode::InvalidChannels: return "InvalidChannels";
  case ErrorCode::HrOutOfRange: return "HrOutOfRange";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  case ErrorCode::TooFewSamples: return "TooFewSamples";
  case ErrorCode::RecordingTooShort: return "RecordingTooShort";
  case ErrorCode::AlignmentError: return "AlignmentError";
  case ErrorCode::InsufficientData: return "InsufficientData";
  case ErrorCode::EmptyMatrix: return "EmptyMatrix";
  case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
  case ErrorCode::NotEnoughRows: return "NotEnoughRows";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::BadMagic: return "BadMagic";
  case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
  case ErrorCode::TruncatedPayload: return "TruncatedPayload";
  case ErrorCode::CorruptPayload: return "CorruptPayload";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::NonPositiveTruth: return "NonPositiveTruth";
  case ErrorCode::EmptyList: return "EmptyList";
  case ErrorCode::BadHeader: return "BadHeader";
  case ErrorCode::NonUniformSpacing: return "NonUniformSpacing";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> index) {
  std::string out(to_string(code));
  if (index)
    out += "(" + std::to_string(*index) + ")";
  out += ": ";
  out += message;
  return out;
}

} // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> index,
             std::optional<std::size_t> column)
    : std::runtime_error(decorate(code, message, index)), code_(code),
      index_(index), column_(column) {}

} // namespace pulsehr
