#include "kslab/types.hpp"

namespace kslab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::NonPeriodic: return "NonPeriodic";
    case ErrorCode::SelfIntersection: return "SelfIntersection";
    case ErrorCode::NonClosed: return "NonClosed";
    case ErrorCode::ApexIncluded: return "ApexIncluded";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NoEmbedding: return "NoEmbedding";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::ZeroCurvature: return "ZeroCurvature";
    case ErrorCode::DegenerateProfileRatio: return "DegenerateProfileRatio";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::CoeffVanishes: return "CoeffVanishes";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::VariantViolation: return "VariantViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NotHarmonic: return "NotHarmonic";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace kslab
