#include "alertmon/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "alertmon/error.hpp"
#include "alertmon/landmark_io.hpp"
#include "alertmon/random.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace alertmon {

namespace fs = std::filesystem;
using json = nlohmann::json;

DatasetManifest load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }

    DatasetManifest manifest;
    try {
        fs::path root = doc.value("root", std::string("."));
        if (root.is_relative())
            root = path.parent_path() / root;
        manifest.root = root.lexically_normal();

        for (const auto& e : doc.at("entries")) {
            ManifestEntry entry;
            entry.subject_id = e.at("subject").get<std::string>();
            entry.session_id = e.at("session").get<std::string>();
            entry.label = e.at("label").get<int>();
            entry.fps = e.value("fps", 30.0);
            fs::path rel = e.at("landmarks").get<std::string>();
            entry.landmarks = rel.is_absolute() ? rel : manifest.root / rel;

            if (entry.subject_id.empty() || entry.session_id.empty())
                throw Error(ErrorCode::ParseError, "entry with empty subject or session");
            if (entry.label != kKssAlert && entry.label != kKssLowVigilant && entry.label != kKssDrowsy)
                throw Error(ErrorCode::ParseError,
                            entry.session_id + ": label must be 0, 5 or 10, got " + std::to_string(entry.label));
            if (!(entry.fps > 0.0))
                throw Error(ErrorCode::ParseError, entry.session_id + ": fps must be positive");
            if (!fs::exists(entry.landmarks))
                throw Error(ErrorCode::IoError, entry.session_id + ": missing " + entry.landmarks.string());
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return manifest;
}

FrameSampler::FrameSampler(double start_s, double rate_hz)
    : start_ms_(start_s * 1000.0), period_ms_(1000.0 / rate_hz)
{
    if (!(rate_hz > 0.0) || !(start_s >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "sampler needs start >= 0 and rate > 0");
}

bool FrameSampler::accept(const LandmarkFrame& frame)
{
    const auto t = static_cast<double>(frame.t_ms);
    if (t < start_ms_)
        return false;
    const auto slot = static_cast<std::int64_t>(std::floor((t - start_ms_) / period_ms_));
    if (slot <= last_slot_)
        return false;
    last_slot_ = slot;
    return true;
}

SampleResult sample_frames(std::span<const LandmarkFrame> frames, double start_s, double rate_hz)
{
    FrameSampler sampler(start_s, rate_hz);
    SampleResult result;
    for (const auto& f : frames)
        if (sampler.accept(f))
            result.frames.push_back(f);
    if (result.frames.empty()) {
        const std::int64_t end_ms = frames.empty() ? 0 : frames.back().t_ms;
        result.warning = "session ends at " + std::to_string(end_ms) + " ms, before the " +
                         std::to_string(static_cast<std::int64_t>(start_s * 1000.0)) + " ms sampling start";
    }
    return result;
}

void SplitSpec::validate() const
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorCode::InvalidConfig, "train_fraction must be in (0, 1)");
}

namespace {

std::optional<AlertnessLabel> map_label(int kss, const std::set<int>& include)
{
    if (!include.contains(kss))
        return std::nullopt;
    return kss == kKssAlert ? AlertnessLabel::Alert : AlertnessLabel::Drowsy;
}

struct SessionFeatures {
    std::vector<std::pair<const LandmarkFrame*, FeatureVector>> valid;
};

} // namespace

Dataset assemble_dataset(const std::vector<SessionSamples>& sessions, const DatasetOptions& options)
{
    Dataset dataset;
    std::vector<SessionFeatures> features(sessions.size());
    detail::parallel_for(
        sessions.size(),
        [&](std::size_t i) {
            for (const auto& f : sessions[i].frames)
                if (auto v = try_compute_features(f))
                    features[i].valid.emplace_back(&f, *v);
        },
        1);

    std::vector<std::string> subjects;
    for (const auto& s : sessions) {
        if (s.warning)
            dataset.warnings.push_back(s.session_id + ": " + *s.warning);
        if (map_label(s.kss_label, options.include_labels) &&
            std::find(subjects.begin(), subjects.end(), s.subject_id) == subjects.end())
            subjects.push_back(s.subject_id);
    }

    for (const auto& subject : subjects) {
        const auto alert = std::find_if(sessions.begin(), sessions.end(), [&](const SessionSamples& s) {
            return s.subject_id == subject && s.kss_label == kKssAlert;
        });
        if (alert == sessions.end())
            throw Error(ErrorCode::MissingAlertBaseline, "subject '" + subject + "' has no alert session");
        const auto& valid = features[static_cast<std::size_t>(alert - sessions.begin())].valid;
        std::vector<FeatureVector> raw;
        for (std::size_t i = 0; i < valid.size() && i < options.baseline.frames; ++i)
            raw.push_back(valid[i].second);
        dataset.baselines.emplace(subject, fit_baseline(raw, subject, options.baseline));
    }

    for (std::size_t i = 0; i < sessions.size(); ++i) {
        const auto& s = sessions[i];
        const auto label = map_label(s.kss_label, options.include_labels);
        if (!label)
            continue;
        const auto& baseline = dataset.baselines.at(s.subject_id);
        for (const auto& [frame, raw] : features[i].valid) {
            Sample sample;
            sample.subject_id = s.subject_id;
            sample.session_id = s.session_id;
            sample.frame_index = frame->frame_index;
            sample.t_ms = frame->t_ms;
            sample.label = *label;
            sample.raw = raw;
            sample.normalized = normalize(raw, baseline);
            dataset.samples.push_back(std::move(sample));
        }
    }
    return dataset;
}

Dataset load_dataset(const DatasetManifest& manifest, const DatasetOptions& options)
{
    std::vector<SessionSamples> sessions(manifest.entries.size());
    detail::parallel_for(
        manifest.entries.size(),
        [&](std::size_t i) {
            const auto& e = manifest.entries[i];
            auto& s = sessions[i];
            s.subject_id = e.subject_id;
            s.session_id = e.session_id;
            s.kss_label = e.label;
            if (e.label != kKssAlert && !options.include_labels.contains(e.label))
                return;
            std::ifstream in(e.landmarks);
            if (!in)
                throw Error(ErrorCode::IoError, "cannot open " + e.landmarks.string());
            LandmarkReader reader(in);
            FrameSampler sampler(options.sample_start_s, options.sample_rate_hz);
            std::int64_t last_t = 0;
            try {
                while (auto f = reader.next()) {
                    last_t = f->t_ms;
                    if (sampler.accept(*f))
                        s.frames.push_back(std::move(*f));
                }
            } catch (const Error& err) {
                throw Error(err.code(), e.landmarks.string() + ": " + err.what());
            }
            if (s.frames.empty())
                s.warning = "session ends at " + std::to_string(last_t) + " ms, before sampling start";
        },
        1);
    return assemble_dataset(sessions, options);
}

SplitResult split_dataset(const std::vector<Sample>& samples, const SplitSpec& spec)
{
    spec.validate();
    Rng rng(spec.seed);
    std::vector<bool> in_train(samples.size(), false);

    if (spec.mode == SplitMode::FrameLevel) {
        std::vector<std::size_t> order(samples.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        rng.shuffle(order);
        const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(samples.size())));
        for (std::size_t i = 0; i < n_train; ++i)
            in_train[order[i]] = true;
    } else {
        std::vector<std::string> subjects;
        for (const auto& s : samples)
            subjects.push_back(s.subject_id);
        std::sort(subjects.begin(), subjects.end());
        subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
        rng.shuffle(subjects);
        auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(subjects.size())));
        if (subjects.size() >= 2)
            n_train = std::clamp<std::size_t>(n_train, 1, subjects.size() - 1);
        const std::set<std::string> train_subjects(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_train));
        for (std::size_t i = 0; i < samples.size(); ++i)
            in_train[i] = train_subjects.contains(samples[i].subject_id);
    }

    SplitResult result;
    for (std::size_t i = 0; i < samples.size(); ++i)
        (in_train[i] ? result.train : result.test).push_back(samples[i]);
    return result;
}

SplitResult build_dataset(const DatasetManifest& manifest, const SplitSpec& split, const DatasetOptions& options)
{
    return split_dataset(load_dataset(manifest, options).samples, split);
}

std::vector<FeatureVector> normalized_vectors(std::span<const Sample> samples)
{
    std::vector<FeatureVector> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.normalized);
    return out;
}

std::vector<AlertnessLabel> sample_labels(std::span<const Sample> samples)
{
    std::vector<AlertnessLabel> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.label);
    return out;
}

std::vector<FeatureSweepRow> sweep_features(std::span<const Sample> train, std::span<const Sample> test, std::size_t k)
{
    if (train.empty() || test.empty())
        throw Error(ErrorCode::EmptyTestSet, "feature sweep needs non-empty train and test sets");
    const auto train_vectors = normalized_vectors(train);
    const auto train_labels = sample_labels(train);
    const auto test_vectors = normalized_vectors(test);
    const auto test_labels = sample_labels(test);

    std::vector<FeatureSweepRow> rows;
    for (const FeatureMask mask : all_feature_masks()) {
        const KnnModel model = alertmon::train(train_vectors, train_labels, mask, k);
        rows.push_back({mask, evaluate(model, test_vectors, test_labels)});
    }
    return rows;
}

StateStatistics state_statistics(std::span<const Sample> samples)
{
    StateStatistics st;
    std::array<double, kFeatureCount> sum_a{}, sum_d{}, ss_a{}, ss_d{};
    for (const auto& s : samples) {
        const bool alert = s.label == AlertnessLabel::Alert;
        (alert ? st.n_alert : st.n_drowsy)++;
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            (alert ? sum_a : sum_d)[f] += s.raw.values[f];
    }
    if (st.n_alert == 0 || st.n_drowsy == 0)
        throw Error(ErrorCode::MissingClass, "state statistics need both alert and drowsy samples");
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        st.alert_mean[f] = sum_a[f] / static_cast<double>(st.n_alert);
        st.drowsy_mean[f] = sum_d[f] / static_cast<double>(st.n_drowsy);
    }
    for (const auto& s : samples) {
        const bool alert = s.label == AlertnessLabel::Alert;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const double d = s.raw.values[f] - (alert ? st.alert_mean : st.drowsy_mean)[f];
            (alert ? ss_a : ss_d)[f] += d * d;
        }
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        st.alert_std[f] = std::sqrt(ss_a[f] / static_cast<double>(st.n_alert));
        st.drowsy_std[f] = std::sqrt(ss_d[f] / static_cast<double>(st.n_drowsy));
        st.delta_percent[f] = (st.drowsy_mean[f] - st.alert_mean[f]) / st.alert_mean[f] * 100.0;
    }
    return st;
}

double detection_rate(std::span<const LandmarkFrame> frames)
{
    if (frames.empty())
        throw Error(ErrorCode::EmptySession, "detection rate of an empty session");
    std::size_t detected = 0;
    for (const auto& f : frames)
        detected += try_compute_features(f).has_value();
    return static_cast<double>(detected) / static_cast<double>(frames.size());
}

} // namespace alertmon
