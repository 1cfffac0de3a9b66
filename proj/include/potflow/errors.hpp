#pragma once

#include <stdexcept>
#include <string>

namespace potflow {

// Machine-readable failure categories. `Parse`..`InvalidArgument` indicate bad
// input; the remaining codes indicate that a computation could not be carried
// out on otherwise valid input.
enum class ErrorCode {
    Parse,
    Validation,
    InvalidArgument,
    Io,
    NoDrivingHead,
    Unbounded,
    Infeasible,
    TooManySinks,
    Domain,
    NumericFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_name() const { return error_code_name(code_); }

private:
    ErrorCode code_;
};

} // namespace potflow
