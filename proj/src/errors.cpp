#include "potflow/errors.hpp"

namespace potflow {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io";
    case ErrorCode::NoDrivingHead: return "no_driving_head";
    case ErrorCode::Unbounded: return "unbounded";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::TooManySinks: return "too_many_sinks";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::NumericFailure: return "numeric_failure";
    }
    return "unknown";
}

} // namespace potflow
