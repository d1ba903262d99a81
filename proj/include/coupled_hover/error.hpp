#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coupled_hover {

enum class ErrorCode {
  kNotSkew,
  kNotOrthonormal,
  kRankDeficientC,
  kNotD1Minimal,
  kZeroColumn,
  kNonFiniteState,
  kThrustDegenerate,
  kHeadingSingular,
  kIllConditionedC,
  kInfeasibleDomain,
  kNotCertified,
  kParseError,
  kValidationError,
  kInvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSkew: return "NotSkew";
    case ErrorCode::kNotOrthonormal: return "NotOrthonormal";
    case ErrorCode::kRankDeficientC: return "RankDeficientC";
    case ErrorCode::kNotD1Minimal: return "NotD1Minimal";
    case ErrorCode::kZeroColumn: return "ZeroColumn";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kThrustDegenerate: return "ThrustDegenerate";
    case ErrorCode::kHeadingSingular: return "HeadingSingular";
    case ErrorCode::kIllConditionedC: return "IllConditionedC";
    case ErrorCode::kInfeasibleDomain: return "InfeasibleDomain";
    case ErrorCode::kNotCertified: return "NotCertified";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Validation failure tied to a config field path such as `platform.mass`.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(ErrorCode::kValidationError, field + ": " + message),
        field_(std::move(field)),
        reason_(message) {}

  const std::string& field() const noexcept { return field_; }
  /// Message without the field prefix.
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

}  // namespace coupled_hover
