#include "alertmon/error.hpp"

namespace alertmon {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::FaceNotPresent: return "FaceNotPresent";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InsufficientBaseline: return "InsufficientBaseline";
    case ErrorCode::AlreadyNormalized: return "AlreadyNormalized";
    case ErrorCode::InsufficientTraining: return "InsufficientTraining";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::MixedNormalization: return "MixedNormalization";
    case ErrorCode::CalibrationFailed: return "CalibrationFailed";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::MissingAlertBaseline: return "MissingAlertBaseline";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code)
{
}

} // namespace alertmon
