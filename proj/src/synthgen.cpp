#include "alertmon/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "alertmon/error.hpp"
#include "alertmon/landmark_io.hpp"
#include "alertmon/random.hpp"
#include "alertmon/serialization.hpp"

namespace alertmon {

namespace {

struct Episode {
    double start_ms;
    double duration_ms;
};

std::vector<Episode> schedule(Rng& rng, double rate_per_ms, double duration_ms, double total_ms)
{
    std::vector<Episode> out;
    if (rate_per_ms <= 0.0 || duration_ms <= 0.0)
        return out;
    double t = rng.exponential(rate_per_ms);
    while (t < total_ms) {
        out.push_back({t, duration_ms});
        t += duration_ms + rng.exponential(rate_per_ms);
    }
    return out;
}

// Phase in [0, 1] of the episode covering t, or negative when none does.
double episode_phase(const std::vector<Episode>& episodes, double t)
{
    for (const auto& e : episodes) {
        if (t < e.start_ms)
            break;
        if (t <= e.start_ms + e.duration_ms)
            return (t - e.start_ms) / e.duration_ms;
    }
    return -1.0;
}

void place_eye(std::vector<Point2>& pts, std::size_t first, Point2 center, double ear)
{
    using namespace synth_geometry;
    const double w = kEyeWidth;
    const double h = ear * w / 2.0; // EAR = 4h / 2w
    pts[first + 0] = {center.x - w / 2.0, center.y};
    pts[first + 1] = {center.x - w / 6.0, center.y - h};
    pts[first + 2] = {center.x + w / 6.0, center.y - h};
    pts[first + 3] = {center.x + w / 2.0, center.y};
    pts[first + 4] = {center.x + w / 6.0, center.y + h};
    pts[first + 5] = {center.x - w / 6.0, center.y + h};
}

bool in_gap(const std::vector<FaceGap>& gaps, std::int64_t t)
{
    return std::any_of(gaps.begin(), gaps.end(), [t](const FaceGap& g) {
        return t >= g.start_ms && t < g.start_ms + g.duration_ms;
    });
}

} // namespace

void SynthProfile::validate() const
{
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidProfile, msg); };
    for (double v : {fps, duration_s, base_eye_openness, base_mouth_openness, blink_rate_hz,
                     blink_duration_ms, yawn_rate_per_min, yawn_duration_ms, drowsy_ear_scale,
                     drowsy_mar_scale, jitter_px}) {
        if (!std::isfinite(v))
            bad("non-finite profile value");
    }
    if (!(fps > 0.0))
        bad("fps must be positive");
    if (duration_s < 0.0 || blink_rate_hz < 0.0 || blink_duration_ms < 0.0 || yawn_rate_per_min < 0.0 ||
        yawn_duration_ms < 0.0 || jitter_px < 0.0 || base_mouth_openness < 0.0)
        bad("rates, durations and jitter must be non-negative");
    if (!(base_eye_openness > 0.0))
        bad("base_eye_openness must be positive");
    if (!(drowsy_ear_scale > 0.0) || !(drowsy_mar_scale > 0.0))
        bad("scales must be positive");
    for (const auto& g : face_gaps)
        if (g.start_ms < 0 || g.duration_ms < 0)
            bad("face gaps must be non-negative");
}

std::vector<Point2> template_face(double ear, double mar, Point2 offset)
{
    using namespace synth_geometry;
    const double cx = kFaceCenter.x + offset.x;
    const double cy = kFaceCenter.y + offset.y;
    std::vector<Point2> pts(kLandmarkCount);

    for (std::size_t i = 0; i <= 16; ++i) {
        const double theta = std::numbers::pi * (1.0 - static_cast<double>(i) / 16.0);
        pts[i] = {cx + 90.0 * std::cos(theta), cy + 100.0 * std::sin(theta)};
    }
    for (std::size_t i = 0; i < 5; ++i) {
        const double u = static_cast<double>(i) / 4.0;
        const double lift = 6.0 * std::sin(std::numbers::pi * u);
        pts[17 + i] = {cx - 60.0 + 45.0 * u, cy - 50.0 - lift};
        pts[22 + i] = {cx + 15.0 + 45.0 * u, cy - 50.0 - lift};
    }
    for (std::size_t i = 0; i < 4; ++i)
        pts[27 + i] = {cx, cy - 30.0 + 10.0 * static_cast<double>(i)};
    for (std::size_t i = 0; i < 5; ++i)
        pts[31 + i] = {cx - 12.0 + 6.0 * static_cast<double>(i), cy + 10.0 + (i == 2 ? 2.0 : 0.0)};

    place_eye(pts, 36, {cx - 35.0, cy - 25.0}, ear);
    place_eye(pts, 42, {cx + 35.0, cy - 25.0}, ear);

    const double mx = cx;
    const double my = cy + 50.0;
    const double w = kMouthWidth;
    const double v = mar * w; // MAR = 3v / 3w
    // Outer lip: 48 left corner, 49-53 upper, 54 right corner, 55-59 lower.
    const double ow = w / 2.0 + 8.0;
    const double oh = v / 2.0 + 6.0;
    for (std::size_t i = 0; i < 12; ++i) {
        const double theta = std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / 12.0;
        pts[48 + i] = {mx + ow * std::cos(theta), my + oh * std::sin(theta)};
    }
    // Inner lip: 60=A, 61=C, 62=E, 63=G, 64=B, 65=H, 66=F, 67=D.
    pts[60] = {mx - w / 2.0, my};
    pts[61] = {mx - w / 4.0, my - v / 2.0};
    pts[62] = {mx, my - v / 2.0};
    pts[63] = {mx + w / 4.0, my - v / 2.0};
    pts[64] = {mx + w / 2.0, my};
    pts[65] = {mx + w / 4.0, my + v / 2.0};
    pts[66] = {mx, my + v / 2.0};
    pts[67] = {mx - w / 4.0, my + v / 2.0};
    return pts;
}

std::vector<LandmarkFrame> generate_session(const SynthProfile& profile, AlertnessLabel label)
{
    profile.validate();
    const bool drowsy = label == AlertnessLabel::Drowsy;
    const auto stream = static_cast<std::uint64_t>(label) * 2;
    Rng events_rng(mix_seed(profile.seed, stream));
    Rng jitter_rng(mix_seed(profile.seed, stream + 1));

    const double total_ms = profile.duration_s * 1000.0;
    const auto blinks = schedule(events_rng, profile.blink_rate_hz / 1000.0, profile.blink_duration_ms, total_ms);
    const auto yawns = drowsy ? schedule(events_rng, profile.yawn_rate_per_min / 60000.0,
                                         profile.yawn_duration_ms, total_ms)
                              : std::vector<Episode>{};
    const double base_ear = profile.base_eye_openness * (drowsy ? profile.drowsy_ear_scale : 1.0);
    const double base_mar = profile.base_mouth_openness;

    const auto n_frames = static_cast<std::size_t>(std::floor(profile.duration_s * profile.fps + 1e-9));
    std::vector<LandmarkFrame> frames;
    frames.reserve(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
        LandmarkFrame frame;
        frame.frame_index = i;
        frame.t_ms = std::llround(static_cast<double>(i) * 1000.0 / profile.fps);
        const auto t = static_cast<double>(frame.t_ms);

        if (in_gap(profile.face_gaps, frame.t_ms)) {
            frames.push_back(std::move(frame));
            continue;
        }
        frame.face_present = true;

        double ear = base_ear;
        if (const double u = episode_phase(blinks, t); u >= 0.0)
            ear *= 1.0 - (1.0 - synth_geometry::kBlinkClosure) * (1.0 - std::abs(2.0 * u - 1.0));
        double mar = base_mar;
        if (const double u = episode_phase(yawns, t); u >= 0.0) {
            // Trapezoid: 20% ramp up, plateau, 20% ramp down.
            const double bump = std::clamp(std::min(u, 1.0 - u) / 0.2, 0.0, 1.0);
            mar *= 1.0 + (profile.drowsy_mar_scale - 1.0) * bump;
        }

        // Slow head sway; features are similarity-invariant so it only
        // exercises the geometry path.
        const Point2 sway{5.0 * std::sin(2.0 * std::numbers::pi * t / 7000.0),
                          3.0 * std::sin(2.0 * std::numbers::pi * t / 11000.0)};
        frame.points = template_face(ear, mar, sway);
        if (profile.jitter_px > 0.0) {
            for (auto& p : frame.points) {
                p.x += profile.jitter_px * jitter_rng.gaussian();
                p.y += profile.jitter_px * jitter_rng.gaussian();
            }
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<SynthSession> generate_corpus(const CorpusOptions& options)
{
    options.base.validate();
    std::vector<SynthSession> out;
    out.reserve(options.subjects * 2);
    for (std::size_t s = 0; s < options.subjects; ++s) {
        Rng subject_rng(mix_seed(options.base.seed, 1000 + s));
        SynthProfile profile = options.base;
        profile.seed = mix_seed(options.base.seed, s);
        profile.base_eye_openness *= 1.0 + options.subject_variation * (2.0 * subject_rng.uniform() - 1.0);
        profile.base_mouth_openness *= 1.0 + options.subject_variation * (2.0 * subject_rng.uniform() - 1.0);

        char id[16];
        std::snprintf(id, sizeof(id), "s%02zu", s + 1);
        for (auto label : {AlertnessLabel::Alert, AlertnessLabel::Drowsy}) {
            SynthSession session;
            session.subject_id = id;
            session.session_id = std::string(id) + (label == AlertnessLabel::Alert ? "_alert" : "_drowsy");
            session.label = label;
            session.profile = profile;
            session.frames = generate_session(profile, label);
            out.push_back(std::move(session));
        }
    }
    return out;
}

std::filesystem::path write_corpus(const std::vector<SynthSession>& sessions, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "landmarks");
    fs::create_directories(dir / "truth");

    nlohmann::ordered_json manifest;
    manifest["root"] = ".";
    manifest["entries"] = nlohmann::ordered_json::array();
    for (const auto& s : sessions) {
        const fs::path rel = fs::path("landmarks") / (s.session_id + ".jsonl");
        write_landmarks(dir / rel, s.frames);

        std::ofstream truth(dir / "truth" / (s.session_id + ".truth.json"));
        if (!truth)
            throw Error(ErrorCode::IoError, "cannot write truth file for " + s.session_id);
        truth << truth_to_json(s.session_id, s.label, s.profile).dump(2) << '\n';

        nlohmann::ordered_json entry;
        entry["subject"] = s.subject_id;
        entry["session"] = s.session_id;
        entry["label"] = s.label == AlertnessLabel::Alert ? 0 : 10;
        entry["landmarks"] = rel.generic_string();
        entry["fps"] = s.profile.fps;
        manifest["entries"].push_back(std::move(entry));
    }
    const fs::path manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + manifest_path.string());
    out << manifest.dump(2) << '\n';
    return manifest_path;
}

} // namespace alertmon
