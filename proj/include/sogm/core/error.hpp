#pragma once

#include <stdexcept>
#include <string>

namespace sogm {

enum class ErrorCode {
    // parse / format errors
    BadMagic,
    TruncatedPayload,
    LayerMismatch,
    MissingHeaderKey,
    BadHeaderValue,
    BadCellValue,
    CellCountMismatch,
    // contract violations
    DomainError,
    UnknownLayer,
    ResolutionMismatch,
    IndexOutOfRange,
    MisalignedPatch,
    BehindCamera,
    TotalConflict,
    NotPositiveSemidefinite,
    OutOfTimeSpan,
    BadConfig,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    bool is_parse_error() const noexcept {
        switch (code_) {
        case ErrorCode::BadMagic:
        case ErrorCode::TruncatedPayload:
        case ErrorCode::LayerMismatch:
        case ErrorCode::MissingHeaderKey:
        case ErrorCode::BadHeaderValue:
        case ErrorCode::BadCellValue:
        case ErrorCode::CellCountMismatch:
        case ErrorCode::BadConfig:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorCode code_;
};

} // namespace sogm
