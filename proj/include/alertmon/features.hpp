#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alertmon/types.hpp"

namespace alertmon {

enum class Feature : std::size_t { Ear = 0, Mar = 1, Puc = 2, Moe = 3 };

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<Feature, kFeatureCount> kAllFeatures{Feature::Ear, Feature::Mar,
                                                                 Feature::Puc, Feature::Moe};

const char* to_string(Feature f) noexcept;

// Lengths below this (pixels, or EAR units for MOE) are treated as degenerate.
inline constexpr double kDegenerateEpsilon = 1e-9;
// Floor applied to baseline std during normalization.
inline constexpr double kStdFloor = 1e-6;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    bool normalized = false;
    // Set by normalize() for features whose baseline std was below kStdFloor.
    std::array<bool, kFeatureCount> zero_std{};

    double ear() const noexcept { return values[0]; }
    double mar() const noexcept { return values[1]; }
    double puc() const noexcept { return values[2]; }
    double moe() const noexcept { return values[3]; }

    double operator[](Feature f) const noexcept { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) noexcept { return values[static_cast<std::size_t>(f)]; }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Non-empty subset of {EAR, MAR, PUC, MOE}. Columns are always taken in
// EAR, MAR, PUC, MOE order.
class FeatureMask {
public:
    constexpr FeatureMask() = default;
    constexpr explicit FeatureMask(std::uint8_t bits) : bits_(bits & 0x0F) {}
    FeatureMask(std::initializer_list<Feature> features);

    static FeatureMask all() { return FeatureMask(0x0F); }
    // Accepts "EAR,MAR" or "EAR+MAR", case-insensitive.
    static FeatureMask parse(std::string_view text);

    std::uint8_t bits() const noexcept { return bits_; }
    bool empty() const noexcept { return bits_ == 0; }
    bool contains(Feature f) const noexcept { return (bits_ >> static_cast<unsigned>(f)) & 1U; }
    std::size_t size() const noexcept;
    std::vector<Feature> features() const;
    std::vector<std::string> names() const;
    // "MAR+MOE"
    std::string label() const;

    // Project a vector onto the mask's columns.
    std::vector<double> project(const FeatureVector& v) const;

    friend bool operator==(FeatureMask, FeatureMask) = default;

private:
    std::uint8_t bits_ = 0;
};

// The 15 non-empty masks: singletons, pairs, triples, then all four.
const std::array<FeatureMask, 15>& all_feature_masks();

double compute_ear(const EyeLandmarks& eye);
double compute_mar(const MouthLandmarks& mouth);
double compute_puc(const EyeLandmarks& eye);
double compute_moe(double ear, double mar);

// Mean over both eyes.
double compute_frame_ear(const LandmarkFrame& frame);
double compute_frame_puc(const LandmarkFrame& frame);

FeatureVector compute_features(const LandmarkFrame& frame);
// nullopt for face-absent or feature-invalid frames.
std::optional<FeatureVector> try_compute_features(const LandmarkFrame& frame) noexcept;

struct BaselineStats {
    std::string subject_id;
    std::array<double, kFeatureCount> mean{};
    std::array<double, kFeatureCount> std{};
    std::size_t n_frames = 0;
};

struct BaselineOptions {
    std::size_t frames = 30;
    std::size_t min_frames = 15;
};

// Mean and population std over the first options.frames vectors (or all of
// them when fewer are available but at least options.min_frames).
BaselineStats fit_baseline(std::span<const FeatureVector> raw, std::string subject_id,
                           const BaselineOptions& options = {});

FeatureVector normalize(const FeatureVector& raw, const BaselineStats& baseline);
FeatureVector denormalize(const FeatureVector& normalized, const BaselineStats& baseline);

struct FrameFeatures {
    std::uint64_t frame_index = 0;
    std::int64_t t_ms = 0;
    FeatureVector features;
};

} // namespace alertmon
