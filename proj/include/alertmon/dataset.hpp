#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "alertmon/classifier.hpp"
#include "alertmon/features.hpp"
#include "alertmon/types.hpp"

namespace alertmon {

// Karolinska-scale labels used by the recording layout.
inline constexpr int kKssAlert = 0;
inline constexpr int kKssLowVigilant = 5;
inline constexpr int kKssDrowsy = 10;

struct ManifestEntry {
    std::string subject_id;
    std::string session_id;
    int label = kKssAlert;
    std::filesystem::path landmarks; // resolved against the manifest root
    double fps = 30.0;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

// Relative roots resolve against the manifest's directory. Validates labels
// and that every landmark file exists.
DatasetManifest load_manifest(const std::filesystem::path& path);

// --- frame sampling -------------------------------------------------------

// Keeps, for each sampling boundary start + n/rate seconds, the first frame
// inside [boundary, next boundary). Boundaries with no frame are skipped.
class FrameSampler {
public:
    explicit FrameSampler(double start_s = 40.0, double rate_hz = 1.0);

    bool accept(const LandmarkFrame& frame);

private:
    double start_ms_;
    double period_ms_;
    std::int64_t last_slot_ = -1;
};

struct SampleResult {
    std::vector<LandmarkFrame> frames;
    std::optional<std::string> warning;
};

SampleResult sample_frames(std::span<const LandmarkFrame> frames, double start_s = 40.0, double rate_hz = 1.0);

// --- dataset assembly -----------------------------------------------------

enum class SplitMode { FrameLevel, SubjectLevel };

struct SplitSpec {
    SplitMode mode = SplitMode::FrameLevel;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DatasetOptions {
    // KSS labels to keep; 5 maps to Drowsy when included.
    std::set<int> include_labels{kKssAlert, kKssDrowsy};
    double sample_start_s = 40.0;
    double sample_rate_hz = 1.0;
    BaselineOptions baseline;
};

struct Sample {
    std::string subject_id;
    std::string session_id;
    std::uint64_t frame_index = 0;
    std::int64_t t_ms = 0;
    AlertnessLabel label = AlertnessLabel::Alert;
    FeatureVector raw;
    FeatureVector normalized;
};

// Sampled frames of one recording.
struct SessionSamples {
    std::string subject_id;
    std::string session_id;
    int kss_label = kKssAlert;
    std::vector<LandmarkFrame> frames;
    std::optional<std::string> warning;
};

struct Dataset {
    std::vector<Sample> samples;
    std::map<std::string, BaselineStats> baselines;
    std::vector<std::string> warnings;
};

// Feature extraction + per-subject normalization against the first
// options.baseline.frames valid frames of the subject's first alert session.
Dataset assemble_dataset(const std::vector<SessionSamples>& sessions, const DatasetOptions& options = {});

// Reads and samples every manifest session, then assembles.
Dataset load_dataset(const DatasetManifest& manifest, const DatasetOptions& options = {});

struct SplitResult {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

SplitResult split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec);

SplitResult build_dataset(const DatasetManifest& manifest, const SplitSpec& split,
                          const DatasetOptions& options = {});

std::vector<FeatureVector> normalized_vectors(std::span<const Sample> samples);
std::vector<AlertnessLabel> sample_labels(std::span<const Sample> samples);

// --- evaluation -----------------------------------------------------------

struct FeatureSweepRow {
    FeatureMask mask;
    MetricsReport metrics;
};

// One row per non-empty mask, in all_feature_masks() order.
std::vector<FeatureSweepRow> sweep_features(std::span<const Sample> train, std::span<const Sample> test,
                                            std::size_t k = 38);

struct StateStatistics {
    std::array<double, kFeatureCount> alert_mean{};
    std::array<double, kFeatureCount> alert_std{};
    std::array<double, kFeatureCount> drowsy_mean{};
    std::array<double, kFeatureCount> drowsy_std{};
    // (drowsy - alert) / alert, in percent.
    std::array<double, kFeatureCount> delta_percent{};
    std::size_t n_alert = 0;
    std::size_t n_drowsy = 0;
};

// Raw-feature means and population stds per class.
StateStatistics state_statistics(std::span<const Sample> samples);

double detection_rate(std::span<const LandmarkFrame> frames);

} // namespace alertmon
