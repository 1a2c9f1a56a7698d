#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sarg {

enum class ErrorCode {
    EmptyInput,
    InvalidArgument,
    ProviderUnavailable,
    ResponseEmpty,
    EmbeddingFailure,
    IoError,
    FormatVersionMismatch,
    FormatError,
    UnknownDocId,
    DanglingNode,
    EmptyStartSet,
    InputError,
};

inline std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::ResponseEmpty: return "ResponseEmpty";
        case ErrorCode::EmbeddingFailure: return "EmbeddingFailure";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::UnknownDocId: return "UnknownDocId";
        case ErrorCode::DanglingNode: return "DanglingNode";
        case ErrorCode::EmptyStartSet: return "EmptyStartSet";
        case ErrorCode::InputError: return "InputError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sarg
