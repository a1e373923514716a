#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alertmon/features.hpp"
#include "alertmon/kdtree.hpp"
#include "alertmon/types.hpp"

namespace alertmon {

struct Prediction {
    AlertnessLabel label = AlertnessLabel::Alert;
    double drowsy_fraction = 0.0;
};

// KNN over normalized features. Immutable after construction; predict() is
// safe to call concurrently.
class KnnModel {
public:
    static constexpr const char* kVersion = "1";

    // train_matrix is row-major N x mask.size().
    KnnModel(FeatureMask mask, std::size_t k, std::vector<double> train_matrix,
             std::vector<AlertnessLabel> labels);

    Prediction predict(const FeatureVector& v) const;
    Prediction predict_projected(std::span<const double> q) const;

    // Labels of the kmax nearest training points, nearest first.
    std::vector<AlertnessLabel> neighbor_labels(std::span<const double> q, std::size_t kmax) const;

    FeatureMask mask() const noexcept { return mask_; }
    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dim() const noexcept { return mask_.size(); }
    const std::vector<AlertnessLabel>& labels() const noexcept { return labels_; }
    std::span<const double> train_vector(std::size_t i) const { return index_.point(i); }
    const KdTree& index() const noexcept { return index_; }

    // Fraction of drowsy neighbours at or above which the label is Drowsy.
    double drowsy_threshold() const noexcept { return drowsy_threshold_; }
    void set_drowsy_threshold(double t);

    // Calibration baseline carried alongside the model, when known.
    std::optional<BaselineStats> baseline;

private:
    FeatureMask mask_;
    std::size_t k_;
    std::vector<AlertnessLabel> labels_;
    KdTree index_;
    double drowsy_threshold_ = 0.5;
};

KnnModel train(std::span<const FeatureVector> vectors, std::span<const AlertnessLabel> labels,
               FeatureMask mask, std::size_t k);

// Rows are actual (Alert, Drowsy), columns predicted (Alert, Drowsy).
struct Confusion {
    std::array<std::array<std::size_t, 2>, 2> counts{};

    std::size_t tn() const noexcept { return counts[0][0]; }
    std::size_t fp() const noexcept { return counts[0][1]; }
    std::size_t fn() const noexcept { return counts[1][0]; }
    std::size_t tp() const noexcept { return counts[1][1]; }
    std::size_t total() const noexcept { return tn() + fp() + fn() + tp(); }
    void add(AlertnessLabel actual, AlertnessLabel predicted) noexcept;
};

// Drowsy is the positive class. Undefined ratios (zero denominators) are 0.
struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Confusion confusion;
    AlertnessLabel positive_class = AlertnessLabel::Drowsy;
};

MetricsReport metrics_from_confusion(const Confusion& confusion);

MetricsReport evaluate(const KnnModel& model, std::span<const FeatureVector> vectors,
                       std::span<const AlertnessLabel> labels);

struct SweepRow {
    std::size_t k = 0;
    MetricsReport metrics;
};

struct SweepKResult {
    std::vector<SweepRow> rows;
    // Highest accuracy; smallest k on ties.
    std::size_t best_k = 0;
    double best_accuracy = 0.0;
};

SweepKResult sweep_k(std::span<const FeatureVector> train_vectors,
                     std::span<const AlertnessLabel> train_labels,
                     std::span<const FeatureVector> validation_vectors,
                     std::span<const AlertnessLabel> validation_labels, FeatureMask mask,
                     std::size_t k_min = 1, std::size_t k_max = 45);

} // namespace alertmon
