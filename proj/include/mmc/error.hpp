#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmc {

enum class ErrorCode {
    NotPositiveDefinite,
    NotPositiveSemiDefinite,
    SingularMatrix,
    DimensionMismatch,
    DimensionTooLarge,
    DomainError,
    TooFewSamples,
    SingularSampleCovariance,
    SupportViolation,
    DegenerateVariance,
    MissingMoment,
    InvalidParams,
    UnsupportedDerivative,
    NonFiniteValue,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; inspect code() to branch on the failure kind.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mmc
