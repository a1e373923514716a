#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alertmon {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b) noexcept;

inline constexpr std::size_t kLandmarkCount = 68;

// One timestamped observation from the landmark predictor. When face_present
// is false the points are not meaningful and may be empty.
struct LandmarkFrame {
    std::uint64_t frame_index = 0;
    std::int64_t t_ms = 0;
    bool face_present = false;
    std::vector<Point2> points;
    std::optional<double> confidence;

    friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

enum class EyeSide { Left, Right };

// p1..p6: corner, upper, upper, corner, lower, lower.
struct EyeLandmarks {
    std::array<Point2, 6> p;
};

// A/B are the corners; (C,D), (E,F), (G,H) are upper/lower pairs.
struct MouthLandmarks {
    Point2 a, b, c, d, e, f, g, h;
};

enum class AlertnessLabel : int { Alert = 0, Drowsy = 1 };

const char* to_string(AlertnessLabel label) noexcept;

struct SessionMeta {
    std::string subject_id;
    std::string session_id;
    std::optional<AlertnessLabel> label;
    double fps_nominal = 30.0;
    std::string source_path;
};

void validate(const SessionMeta& meta);

// 0-based indices into the 68-point annotation (1-based 37-42, 43-48, 61-68).
namespace landmark_index {
inline constexpr std::array<std::size_t, 6> kLeftEye{36, 37, 38, 39, 40, 41};
inline constexpr std::array<std::size_t, 6> kRightEye{42, 43, 44, 45, 46, 47};
// A, B, C, D, E, F, G, H
inline constexpr std::array<std::size_t, 8> kInnerMouth{60, 64, 61, 67, 62, 66, 63, 65};
} // namespace landmark_index

EyeLandmarks extract_eye_landmarks(const LandmarkFrame& frame, EyeSide side);
MouthLandmarks extract_mouth_landmarks(const LandmarkFrame& frame);

} // namespace alertmon
