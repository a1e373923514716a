#include "alertmon/types.hpp"

#include <cmath>

#include "alertmon/error.hpp"

namespace alertmon {

double distance(const Point2& a, const Point2& b) noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

const char* to_string(AlertnessLabel label) noexcept
{
    return label == AlertnessLabel::Drowsy ? "DROWSY" : "ALERT";
}

void validate(const SessionMeta& meta)
{
    if (meta.subject_id.empty() || meta.session_id.empty())
        throw Error(ErrorCode::InvalidConfig, "session meta requires subject and session ids");
    if (!(meta.fps_nominal > 0.0))
        throw Error(ErrorCode::InvalidConfig, "fps_nominal must be positive");
}

namespace {

void require_face(const LandmarkFrame& frame)
{
    if (!frame.face_present)
        throw Error(ErrorCode::FaceNotPresent, "frame " + std::to_string(frame.frame_index));
    if (frame.points.size() != kLandmarkCount)
        throw Error(ErrorCode::MalformedFrame,
                    "expected 68 points, got " + std::to_string(frame.points.size()));
}

// Only the requested indices are checked so that unrelated landmarks never
// influence the result.
const Point2& checked_point(const LandmarkFrame& frame, std::size_t index)
{
    const Point2& p = frame.points[index];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw Error(ErrorCode::MalformedFrame, "non-finite landmark " + std::to_string(index));
    return p;
}

} // namespace

EyeLandmarks extract_eye_landmarks(const LandmarkFrame& frame, EyeSide side)
{
    require_face(frame);
    const auto& indices = side == EyeSide::Left ? landmark_index::kLeftEye : landmark_index::kRightEye;
    EyeLandmarks eye;
    for (std::size_t i = 0; i < indices.size(); ++i)
        eye.p[i] = checked_point(frame, indices[i]);
    return eye;
}

MouthLandmarks extract_mouth_landmarks(const LandmarkFrame& frame)
{
    require_face(frame);
    const auto& idx = landmark_index::kInnerMouth;
    return MouthLandmarks{
        checked_point(frame, idx[0]), checked_point(frame, idx[1]),
        checked_point(frame, idx[2]), checked_point(frame, idx[3]),
        checked_point(frame, idx[4]), checked_point(frame, idx[5]),
        checked_point(frame, idx[6]), checked_point(frame, idx[7]),
    };
}

} // namespace alertmon
