#include "alertmon/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>

#include "alertmon/error.hpp"

namespace alertmon {

const char* to_string(Feature f) noexcept
{
    switch (f) {
    case Feature::Ear: return "EAR";
    case Feature::Mar: return "MAR";
    case Feature::Puc: return "PUC";
    case Feature::Moe: return "MOE";
    }
    return "?";
}

FeatureMask::FeatureMask(std::initializer_list<Feature> features)
{
    for (Feature f : features)
        bits_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(f));
}

FeatureMask FeatureMask::parse(std::string_view text)
{
    FeatureMask mask;
    std::string token;
    auto flush = [&] {
        if (token.empty())
            return;
        bool matched = false;
        for (Feature f : kAllFeatures) {
            if (token == to_string(f)) {
                mask.bits_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(f));
                matched = true;
            }
        }
        if (!matched)
            throw Error(ErrorCode::InvalidConfig, "unknown feature '" + token + "'");
        token.clear();
    };
    for (char ch : text) {
        if (ch == ',' || ch == '+' || ch == ' ')
            flush();
        else
            token.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    flush();
    if (mask.empty())
        throw Error(ErrorCode::InvalidConfig, "empty feature mask");
    return mask;
}

std::size_t FeatureMask::size() const noexcept
{
    return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<Feature> FeatureMask::features() const
{
    std::vector<Feature> out;
    for (Feature f : kAllFeatures)
        if (contains(f))
            out.push_back(f);
    return out;
}

std::vector<std::string> FeatureMask::names() const
{
    std::vector<std::string> out;
    for (Feature f : features())
        out.emplace_back(to_string(f));
    return out;
}

std::string FeatureMask::label() const
{
    std::string out;
    for (const auto& name : names()) {
        if (!out.empty())
            out += '+';
        out += name;
    }
    return out;
}

std::vector<double> FeatureMask::project(const FeatureVector& v) const
{
    std::vector<double> out;
    out.reserve(size());
    for (Feature f : kAllFeatures)
        if (contains(f))
            out.push_back(v[f]);
    return out;
}

const std::array<FeatureMask, 15>& all_feature_masks()
{
    static const std::array<FeatureMask, 15> masks = [] {
        std::array<FeatureMask, 15> out{};
        std::size_t n = 0;
        // Group by subset size, then lexicographic by feature order.
        for (std::size_t size = 1; size <= kFeatureCount; ++size) {
            std::vector<std::uint8_t> group;
            for (unsigned bits = 1; bits < 16; ++bits)
                if (static_cast<std::size_t>(std::popcount(bits)) == size)
                    group.push_back(static_cast<std::uint8_t>(bits));
            // Reversed bit order gives EAR-first lexicographic order.
            auto key = [](std::uint8_t b) {
                unsigned r = 0;
                for (unsigned i = 0; i < 4; ++i)
                    if (b & (1U << i))
                        r |= 1U << (3 - i);
                return r;
            };
            std::sort(group.begin(), group.end(),
                      [&](std::uint8_t a, std::uint8_t b) { return key(a) > key(b); });
            for (auto b : group)
                out[n++] = FeatureMask(b);
        }
        return out;
    }();
    return masks;
}

double compute_ear(const EyeLandmarks& eye)
{
    const auto& p = eye.p;
    const double width = distance(p[0], p[3]);
    if (width < kDegenerateEpsilon)
        throw Error(ErrorCode::DegenerateGeometry, "eye corners coincide");
    return (distance(p[1], p[5]) + distance(p[2], p[4])) / (2.0 * width);
}

double compute_mar(const MouthLandmarks& m)
{
    const double width = distance(m.a, m.b);
    if (width < kDegenerateEpsilon)
        throw Error(ErrorCode::DegenerateGeometry, "mouth corners coincide");
    return (distance(m.c, m.d) + distance(m.e, m.f) + distance(m.g, m.h)) / (3.0 * width);
}

double compute_puc(const EyeLandmarks& eye)
{
    const auto& p = eye.p;
    double perimeter = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        perimeter += distance(p[i], p[(i + 1) % p.size()]);
    if (perimeter < kDegenerateEpsilon)
        throw Error(ErrorCode::DegenerateGeometry, "eye perimeter is zero");
    // Pupil area approximated by the disc on the p2-p5 diagonal.
    const double radius = distance(p[1], p[4]) / 2.0;
    const double area = radius * radius * std::numbers::pi;
    return 4.0 * std::numbers::pi * area / (perimeter * perimeter);
}

double compute_moe(double ear, double mar)
{
    if (ear < kDegenerateEpsilon)
        throw Error(ErrorCode::DegenerateGeometry, "EAR is zero");
    return mar / ear;
}

double compute_frame_ear(const LandmarkFrame& frame)
{
    const double left = compute_ear(extract_eye_landmarks(frame, EyeSide::Left));
    const double right = compute_ear(extract_eye_landmarks(frame, EyeSide::Right));
    return (left + right) / 2.0;
}

double compute_frame_puc(const LandmarkFrame& frame)
{
    const double left = compute_puc(extract_eye_landmarks(frame, EyeSide::Left));
    const double right = compute_puc(extract_eye_landmarks(frame, EyeSide::Right));
    return (left + right) / 2.0;
}

FeatureVector compute_features(const LandmarkFrame& frame)
{
    FeatureVector v;
    const double ear = compute_frame_ear(frame);
    const double mar = compute_mar(extract_mouth_landmarks(frame));
    v[Feature::Ear] = ear;
    v[Feature::Mar] = mar;
    v[Feature::Puc] = compute_frame_puc(frame);
    v[Feature::Moe] = compute_moe(ear, mar);
    return v;
}

std::optional<FeatureVector> try_compute_features(const LandmarkFrame& frame) noexcept
{
    if (!frame.face_present)
        return std::nullopt;
    try {
        return compute_features(frame);
    } catch (const Error&) {
        return std::nullopt;
    }
}

BaselineStats fit_baseline(std::span<const FeatureVector> raw, std::string subject_id,
                           const BaselineOptions& options)
{
    if (raw.size() < options.min_frames || raw.empty()) {
        throw Error(ErrorCode::InsufficientBaseline,
                    "subject '" + subject_id + "': " + std::to_string(raw.size()) +
                        " valid frames, need " + std::to_string(options.min_frames));
    }
    const auto used = raw.first(std::min(raw.size(), options.frames));
    for (const auto& v : used)
        if (v.normalized)
            throw Error(ErrorCode::AlreadyNormalized, "baseline requires raw features");

    BaselineStats b;
    b.subject_id = std::move(subject_id);
    b.n_frames = used.size();
    const double n = static_cast<double>(used.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double sum = 0.0;
        for (const auto& v : used)
            sum += v.values[f];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& v : used)
            ss += (v.values[f] - mean) * (v.values[f] - mean);
        b.mean[f] = mean;
        b.std[f] = std::sqrt(ss / n);
    }
    return b;
}

FeatureVector normalize(const FeatureVector& raw, const BaselineStats& baseline)
{
    if (raw.normalized)
        throw Error(ErrorCode::AlreadyNormalized, "vector is already normalized");
    FeatureVector out;
    out.normalized = true;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        out.zero_std[f] = baseline.std[f] < kStdFloor;
        out.values[f] = (raw.values[f] - baseline.mean[f]) / std::max(baseline.std[f], kStdFloor);
    }
    return out;
}

FeatureVector denormalize(const FeatureVector& normalized, const BaselineStats& baseline)
{
    if (!normalized.normalized)
        throw Error(ErrorCode::MixedNormalization, "vector is not normalized");
    FeatureVector out;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        out.values[f] = normalized.values[f] * std::max(baseline.std[f], kStdFloor) + baseline.mean[f];
    return out;
}

} // namespace alertmon
