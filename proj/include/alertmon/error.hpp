#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alertmon {

enum class ErrorCode {
    FaceNotPresent,
    MalformedFrame,
    DegenerateGeometry,
    InsufficientBaseline,
    AlreadyNormalized,
    InsufficientTraining,
    DimensionMismatch,
    EmptyTestSet,
    EmptyWindow,
    MixedNormalization,
    CalibrationFailed,
    NonMonotonicTimestamps,
    MissingAlertBaseline,
    MissingClass,
    EmptySession,
    InvalidProfile,
    InvalidConfig,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the engine; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace alertmon
