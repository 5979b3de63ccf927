#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace helars {

enum class ErrorKind {
    DomainViolation,
    NonFiniteDerivative,
    StepLimitExceeded,
    SingularBlock,
    NotPositiveDefinite,
    DegenerateMoments,
    NoConvergence,
    SingularHessian,
    MaskViolation,
    BracketingFailure,
    NonMonotoneDivergence,
    ToleranceNotMet,
    ParseError,
    NonPositiveResponse,
    ZeroVariance,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library is reported through this exception. The kind
/// is stable and is what the CLI serializes into its error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace helars
