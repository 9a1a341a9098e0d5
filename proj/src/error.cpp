#include "depbreak/error.hpp"

namespace depbreak {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnparseableCell: return "UnparseableCell";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::TooFewColumns: return "TooFewColumns";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::TiesDetected: return "TiesDetected";
    case ErrorCode::TrimTooSmall: return "TrimTooSmall";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::InsufficientReplicates: return "InsufficientReplicates";
    case ErrorCode::SegmentTooShort: return "SegmentTooShort";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace depbreak
