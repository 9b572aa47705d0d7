#pragma once

#include <stdexcept>
#include <string>

namespace convex_auction {

enum class ErrorCode {
  LengthMismatch,
  NonPositiveMass,
  NonIncreasingSupport,
  MassSumOutOfRange,
  ValueNotInSupport,
  BadQuantile,
  InvalidExponent,
  NonPositiveReserve,
  TooFewBidders,
  AllZeroValues,
  InterimMismatch,
  BadBidderCount,
  NonMonotoneAllocation,
  SupportTooLarge,
  MissingParameter,
  ExponentTooSmall,
  BadEpsilon,
  UnknownMechanism,
  SolverFailed,
  NotMhr,
  BadConfig,
  IoFailure,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonPositiveMass: return "NonPositiveMass";
    case ErrorCode::NonIncreasingSupport: return "NonIncreasingSupport";
    case ErrorCode::MassSumOutOfRange: return "MassSumOutOfRange";
    case ErrorCode::ValueNotInSupport: return "ValueNotInSupport";
    case ErrorCode::BadQuantile: return "BadQuantile";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::NonPositiveReserve: return "NonPositiveReserve";
    case ErrorCode::TooFewBidders: return "TooFewBidders";
    case ErrorCode::AllZeroValues: return "AllZeroValues";
    case ErrorCode::InterimMismatch: return "InterimMismatch";
    case ErrorCode::BadBidderCount: return "BadBidderCount";
    case ErrorCode::NonMonotoneAllocation: return "NonMonotoneAllocation";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::ExponentTooSmall: return "ExponentTooSmall";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::UnknownMechanism: return "UnknownMechanism";
    case ErrorCode::SolverFailed: return "SolverFailed";
    case ErrorCode::NotMhr: return "NotMHR";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Library error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace convex_auction
