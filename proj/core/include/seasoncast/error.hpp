#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seasoncast {

enum class ErrorCode {
  WindowTooShort,
  NonFinite,
  DimensionMismatch,
  TooFewMembers,
  EmptySeries,
  InsufficientHistory,
  InsufficientForecast,
  MissingValue,
  UnknownSeries,
  InvalidQuantile,
  DegenerateSplit,
  NonFiniteLoss,
  AllTargetsNearZero,
  HorizonMismatch,
  ZeroBaseMetric,
  KeyMismatch,
  ConfigMismatch,
  InvalidConfig,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seasoncast
