#include "alertmon/classifier.hpp"

#include <cmath>

#include "alertmon/error.hpp"
#include "parallel.hpp"

namespace alertmon {

namespace {

std::vector<std::int32_t> tie_keys_from(const std::vector<AlertnessLabel>& labels)
{
    std::vector<std::int32_t> keys;
    keys.reserve(labels.size());
    for (auto l : labels)
        keys.push_back(static_cast<std::int32_t>(l));
    return keys;
}

void check_labels(std::span<const AlertnessLabel> labels)
{
    for (auto l : labels)
        if (l != AlertnessLabel::Alert && l != AlertnessLabel::Drowsy)
            throw Error(ErrorCode::InvalidConfig, "label outside {Alert, Drowsy}");
}

} // namespace

KnnModel::KnnModel(FeatureMask mask, std::size_t k, std::vector<double> train_matrix,
                   std::vector<AlertnessLabel> labels)
    : mask_(mask), k_(k), labels_(std::move(labels))
{
    if (mask_.empty())
        throw Error(ErrorCode::InvalidConfig, "feature mask is empty");
    if (k_ == 0)
        throw Error(ErrorCode::InvalidConfig, "k must be positive");
    if (train_matrix.size() != labels_.size() * mask_.size())
        throw Error(ErrorCode::DimensionMismatch, "training matrix does not match labels x mask");
    if (labels_.size() < k_)
        throw Error(ErrorCode::InsufficientTraining,
                    std::to_string(labels_.size()) + " training points for k=" + std::to_string(k_));
    check_labels(labels_);
    for (double v : train_matrix)
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvalidConfig, "non-finite training value");
    index_ = KdTree(std::move(train_matrix), mask_.size(), tie_keys_from(labels_));
}

void KnnModel::set_drowsy_threshold(double t)
{
    if (!(t > 0.0 && t <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "drowsy threshold must be in (0, 1]");
    drowsy_threshold_ = t;
}

std::vector<AlertnessLabel> KnnModel::neighbor_labels(std::span<const double> q, std::size_t kmax) const
{
    if (q.size() != dim())
        throw Error(ErrorCode::DimensionMismatch,
                    "query has " + std::to_string(q.size()) + " features, model expects " +
                        std::to_string(dim()));
    const auto neighbors = index_.query(q, kmax);
    std::vector<AlertnessLabel> out;
    out.reserve(neighbors.size());
    for (const auto& n : neighbors)
        out.push_back(labels_[n.index]);
    return out;
}

Prediction KnnModel::predict_projected(std::span<const double> q) const
{
    const auto labels = neighbor_labels(q, k_);
    std::size_t drowsy = 0;
    for (auto l : labels)
        drowsy += l == AlertnessLabel::Drowsy;
    Prediction p;
    p.drowsy_fraction = static_cast<double>(drowsy) / static_cast<double>(k_);
    p.label = p.drowsy_fraction >= drowsy_threshold_ ? AlertnessLabel::Drowsy : AlertnessLabel::Alert;
    return p;
}

Prediction KnnModel::predict(const FeatureVector& v) const
{
    if (!v.normalized)
        throw Error(ErrorCode::MixedNormalization, "predict expects a normalized vector");
    const auto q = mask_.project(v);
    return predict_projected(q);
}

KnnModel train(std::span<const FeatureVector> vectors, std::span<const AlertnessLabel> labels,
               FeatureMask mask, std::size_t k)
{
    if (vectors.size() != labels.size())
        throw Error(ErrorCode::DimensionMismatch, "vector and label counts differ");
    if (vectors.size() < k)
        throw Error(ErrorCode::InsufficientTraining,
                    std::to_string(vectors.size()) + " training points for k=" + std::to_string(k));
    std::vector<double> matrix;
    matrix.reserve(vectors.size() * mask.size());
    for (const auto& v : vectors) {
        if (!v.normalized)
            throw Error(ErrorCode::MixedNormalization, "training vectors must be normalized");
        for (double x : mask.project(v))
            matrix.push_back(x);
    }
    return KnnModel(mask, k, std::move(matrix), {labels.begin(), labels.end()});
}

void Confusion::add(AlertnessLabel actual, AlertnessLabel predicted) noexcept
{
    ++counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
}

MetricsReport metrics_from_confusion(const Confusion& c)
{
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    MetricsReport m;
    m.confusion = c;
    m.accuracy = ratio(c.tp() + c.tn(), c.total());
    m.precision = ratio(c.tp(), c.tp() + c.fp());
    m.recall = ratio(c.tp(), c.tp() + c.fn());
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

MetricsReport evaluate(const KnnModel& model, std::span<const FeatureVector> vectors,
                       std::span<const AlertnessLabel> labels)
{
    if (vectors.empty())
        throw Error(ErrorCode::EmptyTestSet, "no test vectors");
    if (vectors.size() != labels.size())
        throw Error(ErrorCode::DimensionMismatch, "vector and label counts differ");
    std::vector<AlertnessLabel> predicted(vectors.size());
    detail::parallel_for(vectors.size(), [&](std::size_t i) { predicted[i] = model.predict(vectors[i]).label; });
    Confusion c;
    for (std::size_t i = 0; i < vectors.size(); ++i)
        c.add(labels[i], predicted[i]);
    return metrics_from_confusion(c);
}

SweepKResult sweep_k(std::span<const FeatureVector> train_vectors,
                     std::span<const AlertnessLabel> train_labels,
                     std::span<const FeatureVector> validation_vectors,
                     std::span<const AlertnessLabel> validation_labels, FeatureMask mask,
                     std::size_t k_min, std::size_t k_max)
{
    if (k_min == 0 || k_min > k_max)
        throw Error(ErrorCode::InvalidConfig, "invalid k range");
    if (validation_vectors.empty())
        throw Error(ErrorCode::EmptyTestSet, "no validation vectors");
    if (validation_vectors.size() != validation_labels.size())
        throw Error(ErrorCode::DimensionMismatch, "vector and label counts differ");

    // One kmax query per point; the first k neighbours of the sorted result
    // are exactly the k-nearest set, so every k is read off prefix counts.
    const KnnModel model = train(train_vectors, train_labels, mask, k_max);
    const std::size_t n_k = k_max - k_min + 1;
    std::vector<std::vector<AlertnessLabel>> predicted(validation_vectors.size());
    detail::parallel_for(validation_vectors.size(), [&](std::size_t i) {
        const auto& v = validation_vectors[i];
        if (!v.normalized)
            throw Error(ErrorCode::MixedNormalization, "validation vectors must be normalized");
        const auto neighbors = model.neighbor_labels(mask.project(v), k_max);
        auto& out = predicted[i];
        out.resize(n_k);
        std::size_t drowsy = 0;
        for (std::size_t k = 1; k <= k_max; ++k) {
            drowsy += neighbors[k - 1] == AlertnessLabel::Drowsy;
            if (k < k_min)
                continue;
            const double fraction = static_cast<double>(drowsy) / static_cast<double>(k);
            out[k - k_min] = fraction >= model.drowsy_threshold() ? AlertnessLabel::Drowsy : AlertnessLabel::Alert;
        }
    });

    SweepKResult result;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        Confusion c;
        for (std::size_t i = 0; i < validation_vectors.size(); ++i)
            c.add(validation_labels[i], predicted[i][k - k_min]);
        SweepRow row{k, metrics_from_confusion(c)};
        if (result.rows.empty() || row.metrics.accuracy > result.best_accuracy) {
            result.best_k = k;
            result.best_accuracy = row.metrics.accuracy;
        }
        result.rows.push_back(row);
    }
    return result;
}

} // namespace alertmon
