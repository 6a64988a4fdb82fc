#pragma once

#include <stdexcept>
#include <string>

namespace bergman {

enum class ErrorKind {
  RealityViolation,
  DegreeOverflow,
  DimensionMismatch,
  NonHolomorphicSubstitution,
  ConstantTermPresent,
  NonzeroConstantTerm,
  OrderTooLow,
  SingularLeadingTerm,
  UnsupportedSignature,
  NotCentered,
  NonIdentityQuadratic,
  NotKForm,
  UnsupportedJ,
  MissingBeta,
  InsufficientCurvatureDepth,
  CrossValidationMismatch,
  PrecisionExhausted,
  LogBranchNearSingularity,
  BadInput,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::RealityViolation: return "RealityViolation";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonHolomorphicSubstitution: return "NonHolomorphicSubstitution";
    case ErrorKind::ConstantTermPresent: return "ConstantTermPresent";
    case ErrorKind::NonzeroConstantTerm: return "NonzeroConstantTerm";
    case ErrorKind::OrderTooLow: return "OrderTooLow";
    case ErrorKind::SingularLeadingTerm: return "SingularLeadingTerm";
    case ErrorKind::UnsupportedSignature: return "UnsupportedSignature";
    case ErrorKind::NotCentered: return "NotCentered";
    case ErrorKind::NonIdentityQuadratic: return "NonIdentityQuadratic";
    case ErrorKind::NotKForm: return "NotKForm";
    case ErrorKind::UnsupportedJ: return "UnsupportedJ";
    case ErrorKind::MissingBeta: return "MissingBeta";
    case ErrorKind::InsufficientCurvatureDepth: return "InsufficientCurvatureDepth";
    case ErrorKind::CrossValidationMismatch: return "CrossValidationMismatch";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::LogBranchNearSingularity: return "LogBranchNearSingularity";
    case ErrorKind::BadInput: return "BadInput";
  }
  return "Unknown";
}

/** All library failures carry a kind (machine-checkable) and a message. */
struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace bergman
