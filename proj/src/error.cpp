#include "mmc/error.hpp"

namespace mmc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::SingularSampleCovariance: return "SingularSampleCovariance";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::DegenerateVariance: return "DegenerateVariance";
        case ErrorCode::MissingMoment: return "MissingMoment";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::UnsupportedDerivative: return "UnsupportedDerivative";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace mmc
