#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stresslab {

/// Failure categories surfaced by the geometry kernels.
enum class ErrorCode {
  SingularMetric,
  OutOfDomain,
  EigenFailure,
  NoComplexStructure,
  MultiplicityMismatch,
  BadRegimeParams,
  DegreeExceedsDimension,
  JetUnavailable,
  ConnectionNotMetric,
  EmptySample,
  HypothesisViolated,
  BadBounds,
  LevelSetTouchesBoundary,
  NonRegularValue,
  NotStarShaped,
  DegenerateImmersion,
  BasePointCoincides,
  WindowTooSmall,
  NotKahlerCatalog,
  UnknownCatalogId,
  ConfigParse,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMetric: return "SingularMetric";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::NoComplexStructure: return "NoComplexStructure";
    case ErrorCode::MultiplicityMismatch: return "MultiplicityMismatch";
    case ErrorCode::BadRegimeParams: return "BadRegimeParams";
    case ErrorCode::DegreeExceedsDimension: return "DegreeExceedsDimension";
    case ErrorCode::JetUnavailable: return "JetUnavailable";
    case ErrorCode::ConnectionNotMetric: return "ConnectionNotMetric";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::BadBounds: return "BadBounds";
    case ErrorCode::LevelSetTouchesBoundary: return "LevelSetTouchesBoundary";
    case ErrorCode::NonRegularValue: return "NonRegularValue";
    case ErrorCode::NotStarShaped: return "NotStarShaped";
    case ErrorCode::DegenerateImmersion: return "DegenerateImmersion";
    case ErrorCode::BasePointCoincides: return "BasePointCoincides";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::NotKahlerCatalog: return "NotKahlerCatalog";
    case ErrorCode::UnknownCatalogId: return "UnknownCatalogId";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace stresslab
