#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpath {

enum class ErrorCode {
    OutOfBounds,
    EndpointBlocked,
    ParseError,
    ValidationError,
    UnreadableImage,
    DegenerateDims,
    ZeroVector,
    SameWire,
    Blocked,
    DeadEnd,
    NoPath,
    IoError,
    BindError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::EndpointBlocked: return "EndpointBlocked";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::UnreadableImage: return "UnreadableImage";
        case ErrorCode::DegenerateDims: return "DegenerateDims";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::SameWire: return "SameWire";
        case ErrorCode::Blocked: return "Blocked";
        case ErrorCode::DeadEnd: return "DeadEnd";
        case ErrorCode::NoPath: return "NoPath";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BindError: return "BindError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, service Error events) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qpath
