#include "seasoncast/error.hpp"

namespace seasoncast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewMembers: return "TooFewMembers";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InsufficientForecast: return "InsufficientForecast";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::UnknownSeries: return "UnknownSeries";
    case ErrorCode::InvalidQuantile: return "InvalidQuantile";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::AllTargetsNearZero: return "AllTargetsNearZero";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::ZeroBaseMetric: return "ZeroBaseMetric";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace seasoncast
