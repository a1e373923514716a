#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alertmon/types.hpp"

namespace alertmon {

struct FaceGap {
    std::int64_t start_ms = 0;
    std::int64_t duration_ms = 0;
};

// Parameters of one synthetic recording. Drowsy sessions scale eye openness
// by drowsy_ear_scale for the whole session and add yawns (yawn_rate_per_min)
// during which mouth openness rises to drowsy_mar_scale x base. Blinks, when
// enabled, occur in both states.
struct SynthProfile {
    std::uint64_t seed = 42;
    double fps = 24.0;
    double duration_s = 120.0;
    double base_eye_openness = 0.30;  // EAR target
    double base_mouth_openness = 0.40; // MAR target
    // Off by default: a blink caught in a 30-frame baseline inflates its std
    // enough to hide that subject's drowsy shift.
    double blink_rate_hz = 0.0;
    double blink_duration_ms = 150.0;
    double yawn_rate_per_min = 3.0;
    double yawn_duration_ms = 5000.0;
    double drowsy_ear_scale = 0.75;
    double drowsy_mar_scale = 1.2;
    double jitter_px = 0.5;
    std::vector<FaceGap> face_gaps;

    void validate() const;
};

// Geometry of the template face, in pixels.
namespace synth_geometry {
inline constexpr double kEyeWidth = 30.0;
inline constexpr double kMouthWidth = 40.0;
inline constexpr Point2 kFaceCenter{320.0, 240.0};
// EAR during the deepest point of a blink, relative to the open value.
inline constexpr double kBlinkClosure = 0.1;
} // namespace synth_geometry

struct SynthSession {
    std::string subject_id;
    std::string session_id;
    AlertnessLabel label = AlertnessLabel::Alert;
    SynthProfile profile;
    std::vector<LandmarkFrame> frames;
};

// Deterministic in (profile, label).
std::vector<LandmarkFrame> generate_session(const SynthProfile& profile, AlertnessLabel label);

// 68-point face with the eyes at the given EAR and the inner lips at the given MAR.
std::vector<Point2> template_face(double ear, double mar, Point2 offset = {0.0, 0.0});

struct CorpusOptions {
    std::size_t subjects = 20;
    SynthProfile base;
    // Per-subject relative spread of base eye/mouth openness.
    double subject_variation = 0.15;
};

// One alert and one drowsy session per subject ("sNN_alert", "sNN_drowsy").
std::vector<SynthSession> generate_corpus(const CorpusOptions& options);

// Writes landmarks/<session>.jsonl, truth/<session>.truth.json and a
// manifest.json (KSS labels 0 and 10) under dir. Returns the manifest path.
std::filesystem::path write_corpus(const std::vector<SynthSession>& sessions,
                                   const std::filesystem::path& dir);

} // namespace alertmon
