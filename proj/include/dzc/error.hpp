#pragma once

#include <stdexcept>
#include <string>

namespace dzc {

enum class ErrorCode {
    InvalidArgument,
    LengthMismatch,
    InsufficientLength,
    OutOfRange,
    Degenerate,
    Io,
    Config,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace dzc
