#include "helars/error.hpp"

namespace helars {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DomainViolation: return "DomainViolation";
        case ErrorKind::NonFiniteDerivative: return "NonFiniteDerivative";
        case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
        case ErrorKind::SingularBlock: return "SingularBlock";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::DegenerateMoments: return "DegenerateMoments";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularHessian: return "SingularHessian";
        case ErrorKind::MaskViolation: return "MaskViolation";
        case ErrorKind::BracketingFailure: return "BracketingFailure";
        case ErrorKind::NonMonotoneDivergence: return "NonMonotoneDivergence";
        case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::NonPositiveResponse: return "NonPositiveResponse";
        case ErrorKind::ZeroVariance: return "ZeroVariance";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace helars
