#include "dzc/error.hpp"

namespace dzc {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::LengthMismatch: return "length-mismatch";
        case ErrorCode::InsufficientLength: return "insufficient-length";
        case ErrorCode::OutOfRange: return "out-of-range";
        case ErrorCode::Degenerate: return "degenerate";
        case ErrorCode::Io: return "io";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

}  // namespace dzc
