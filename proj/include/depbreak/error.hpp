#pragma once

#include <stdexcept>
#include <string>

namespace depbreak {

enum class ErrorCode {
  InvalidArgument,
  IoFailure,
  UnparseableCell,
  NonMonotoneDates,
  TooFewColumns,
  TooFewRows,
  NonPositivePrice,
  DegenerateSeries,
  SeriesTooShort,
  TiesDetected,
  TrimTooSmall,
  EmptyPath,
  InsufficientReplicates,
  SegmentTooShort,
  UnsupportedFamily,
  WindowTooShort,
  ParseError,
  LevelOutOfRange,
};

const char* to_string(ErrorCode code) noexcept;

// Every domain failure in the library is reported through this type; the CLI
// maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace depbreak
