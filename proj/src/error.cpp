#include "skewsing/error.hpp"

namespace skewsing {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateSkewing: return "DegenerateSkewing";
    case ErrorCode::NotGaussianKernel: return "NotGaussianKernel";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::InconsistentDiagnostics: return "InconsistentDiagnostics";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NotSkewNormal: return "NotSkewNormal";
    case ErrorCode::SkewnessOutOfRange: return "SkewnessOutOfRange";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace skewsing
