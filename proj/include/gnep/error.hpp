#pragma once

#include <stdexcept>
#include <string>

namespace gnep {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptyBody,
  InteriorPoint,
  SelfPreference,
  NotJointlyConvex,
  UnboundedPreferenceLP,
  EmptyConstraint,
  NoConvergence,
  TooLarge,
  InvalidShares,
  MissingZeroProduction,
  PreconditionViolated,
  ParseError,
  Unsupported,
  Numerical,
};

const char *to_string(ErrorCode code);

/// Library-wide exception. The code is what callers branch on; the message is
/// for humans.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline const char *to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::EmptyBody: return "EmptyBody";
  case ErrorCode::InteriorPoint: return "InteriorPoint";
  case ErrorCode::SelfPreference: return "SelfPreference";
  case ErrorCode::NotJointlyConvex: return "NotJointlyConvex";
  case ErrorCode::UnboundedPreferenceLP: return "UnboundedPreferenceLP";
  case ErrorCode::EmptyConstraint: return "EmptyConstraint";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::TooLarge: return "TooLarge";
  case ErrorCode::InvalidShares: return "InvalidShares";
  case ErrorCode::MissingZeroProduction: return "MissingZeroProduction";
  case ErrorCode::PreconditionViolated: return "PreconditionViolated";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::Unsupported: return "Unsupported";
  case ErrorCode::Numerical: return "Numerical";
  }
  return "Unknown";
}

} // namespace gnep
