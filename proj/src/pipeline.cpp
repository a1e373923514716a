#include "alertmon/pipeline.hpp"

#include "alertmon/error.hpp"

namespace alertmon {

void MonitorConfig::validate() const
{
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (calibration_duration_ms <= 0)
        bad("calibration_duration_ms must be positive");
    if (face_lost_threshold_ms <= 0)
        bad("face_lost_threshold_ms must be positive");
    if (validity_span_ms <= 0)
        bad("validity_span_ms must be positive");
    if (smoothing_window_frames == 0)
        bad("smoothing_window_frames must be at least 1");
    if (decision_stride_frames == 0)
        bad("decision_stride_frames must be at least 1");
    if (!(deviation_threshold_z > 0.0))
        bad("deviation_threshold_z must be positive");
    if (!(min_valid_fraction >= 0.0 && min_valid_fraction <= 1.0))
        bad("min_valid_fraction must be in [0, 1]");
    if (escalation_windows == 0)
        bad("escalation_windows must be at least 1");
    if (baseline.frames == 0 || baseline.min_frames == 0 || baseline.min_frames > baseline.frames)
        bad("baseline frame counts must satisfy 0 < min_frames <= frames");
}

const char* to_string(MonitorState s) noexcept
{
    switch (s) {
    case MonitorState::Calibrating: return "Calibrating";
    case MonitorState::Tracking: return "Tracking";
    case MonitorState::FaceLost: return "FaceLost";
    case MonitorState::LowAlertness: return "LowAlertness";
    }
    return "?";
}

const char* to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::CalibrationStarted: return "CalibrationStarted";
    case EventKind::CalibrationComplete: return "CalibrationComplete";
    case EventKind::StateDecision: return "StateDecision";
    case EventKind::RepositionCue: return "RepositionCue";
    case EventKind::FaceReacquired: return "FaceReacquired";
    case EventKind::LowAlertnessAlert: return "LowAlertnessAlert";
    }
    return "?";
}

const char* to_string(DecisionMode m) noexcept
{
    return m == DecisionMode::Knn ? "knn" : "deviation";
}

namespace {

MonitorEvent make_event(std::int64_t t_ms, EventKind kind)
{
    MonitorEvent e;
    e.t_ms = t_ms;
    e.kind = kind;
    return e;
}

} // namespace

bool operator==(const MonitorEvent& a, const MonitorEvent& b)
{
    auto same_baseline = [](const std::optional<BaselineStats>& x, const std::optional<BaselineStats>& y) {
        if (x.has_value() != y.has_value())
            return false;
        if (!x)
            return true;
        return x->subject_id == y->subject_id && x->mean == y->mean && x->std == y->std &&
               x->n_frames == y->n_frames;
    };
    return a.t_ms == b.t_ms && a.kind == b.kind && a.state == b.state && a.score == b.score &&
           same_baseline(a.baseline, b.baseline);
}

FeatureVector smooth_window(std::span<const FeatureVector> window)
{
    if (window.empty())
        throw Error(ErrorCode::EmptyWindow, "cannot average an empty window");
    FeatureVector out;
    out.normalized = window.front().normalized;
    for (const auto& v : window) {
        if (v.normalized != out.normalized)
            throw Error(ErrorCode::MixedNormalization, "window mixes raw and normalized vectors");
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            out.values[f] += v.values[f];
            out.zero_std[f] = out.zero_std[f] || v.zero_std[f];
        }
    }
    for (double& x : out.values)
        x /= static_cast<double>(window.size());
    return out;
}

Monitor::Monitor(MonitorConfig config, std::shared_ptr<const KnnModel> model)
    : config_(std::move(config)), model_(std::move(model))
{
    config_.validate();
    mode_ = config_.decision_mode.value_or(model_ ? DecisionMode::Knn : DecisionMode::BaselineDeviation);
    if (mode_ == DecisionMode::Knn && !model_)
        throw Error(ErrorCode::InvalidConfig, "knn decision mode requires a model");
    frames_since_decision_ = config_.decision_stride_frames;
}

std::vector<MonitorEvent> Monitor::push(const LandmarkFrame& frame)
{
    std::vector<MonitorEvent> out;
    const std::int64_t t = frame.t_ms;
    if (last_t_ && t < *last_t_) {
        throw Error(ErrorCode::NonMonotonicTimestamps,
                    "t_ms " + std::to_string(t) + " after " + std::to_string(*last_t_));
    }
    last_t_ = t;

    if (!started_) {
        started_ = true;
        calibration_start_ = t;
        out.push_back(make_event(t, EventKind::CalibrationStarted));
    }
    if (state_ == MonitorState::Calibrating && t - calibration_start_ >= config_.calibration_duration_ms)
        complete_calibration(t, out);

    if (!frame.face_present) {
        on_face_absent(t, out);
        return out;
    }

    if (absent_since_) {
        if (cue_emitted_) {
            out.push_back(make_event(t, EventKind::FaceReacquired));
            if (state_ == MonitorState::FaceLost)
                state_ = MonitorState::Tracking;
        }
        absent_since_.reset();
        cue_emitted_ = false;
    }

    const auto features = try_compute_features(frame);
    if (state_ == MonitorState::Calibrating) {
        // Only the first baseline.frames valid frames enter the baseline.
        if (features && calibration_frames_.size() < config_.baseline.frames)
            calibration_frames_.push_back(*features);
        return out;
    }

    track_validity(t, features.has_value());
    if (!features)
        return out;

    window_.push_back(*features);
    if (window_.size() > config_.smoothing_window_frames)
        window_.pop_front();
    ++frames_since_decision_;
    if (window_.size() == config_.smoothing_window_frames &&
        frames_since_decision_ >= config_.decision_stride_frames) {
        decide(t, out);
    }
    return out;
}

void Monitor::complete_calibration(std::int64_t t_ms, std::vector<MonitorEvent>& out)
{
    try {
        baseline_ = fit_baseline(calibration_frames_, config_.subject_id, config_.baseline);
    } catch (const Error& e) {
        throw Error(ErrorCode::CalibrationFailed, e.what());
    }
    calibration_frames_.clear();
    calibration_frames_.shrink_to_fit();
    MonitorEvent ev = make_event(t_ms, EventKind::CalibrationComplete);
    ev.baseline = baseline_;
    out.push_back(std::move(ev));
    state_ = cue_emitted_ ? MonitorState::FaceLost : MonitorState::Tracking;
}

void Monitor::on_face_absent(std::int64_t t_ms, std::vector<MonitorEvent>& out)
{
    if (!absent_since_)
        absent_since_ = t_ms;
    if (cue_emitted_ || t_ms - *absent_since_ < config_.face_lost_threshold_ms)
        return;
    cue_emitted_ = true;
    out.push_back(make_event(t_ms, EventKind::RepositionCue));
    if (state_ != MonitorState::Calibrating) {
        state_ = MonitorState::FaceLost;
        reset_window();
        validity_.clear();
        drowsy_run_ = 0;
        escalated_ = false;
    }
}

void Monitor::track_validity(std::int64_t t_ms, bool valid)
{
    validity_.emplace_back(t_ms, valid);
    while (!validity_.empty() && validity_.front().first <= t_ms - config_.validity_span_ms)
        validity_.pop_front();
    std::size_t n_valid = 0;
    for (const auto& [_, v] : validity_)
        n_valid += v;
    const double fraction = static_cast<double>(n_valid) / static_cast<double>(validity_.size());
    if (fraction < config_.min_valid_fraction && !window_.empty())
        reset_window();
}

void Monitor::reset_window()
{
    window_.clear();
    frames_since_decision_ = config_.decision_stride_frames;
    ++window_resets_;
}

void Monitor::decide(std::int64_t t_ms, std::vector<MonitorEvent>& out)
{
    frames_since_decision_ = 0;
    const std::vector<FeatureVector> window(window_.begin(), window_.end());
    const FeatureVector z = normalize(smooth_window(window), *baseline_);

    MonitorEvent ev = make_event(t_ms, EventKind::StateDecision);
    AlertnessLabel label;
    double score;
    if (mode_ == DecisionMode::Knn) {
        const Prediction p = model_->predict(z);
        label = p.label;
        score = p.drowsy_fraction;
    } else {
        // Drowsiness raises MOE, so only positive deviations count.
        score = z.moe();
        label = score >= config_.deviation_threshold_z ? AlertnessLabel::Drowsy : AlertnessLabel::Alert;
    }
    ev.state = label;
    ev.score = score;
    out.push_back(ev);

    if (label == AlertnessLabel::Alert) {
        drowsy_run_ = 0;
        escalated_ = false;
        if (state_ == MonitorState::LowAlertness)
            state_ = MonitorState::Tracking;
        return;
    }
    ++drowsy_run_;
    const std::size_t n = config_.smoothing_window_frames;
    const std::size_t spanned = n + (drowsy_run_ - 1) * config_.decision_stride_frames;
    if (!escalated_ && spanned >= config_.escalation_windows * n) {
        escalated_ = true;
        state_ = MonitorState::LowAlertness;
        MonitorEvent alert = make_event(t_ms, EventKind::LowAlertnessAlert);
        alert.state = AlertnessLabel::Drowsy;
        alert.score = score;
        out.push_back(alert);
    }
}

void Monitor::finish() const
{
    if (!started_)
        throw Error(ErrorCode::CalibrationFailed, "empty stream");
    if (state_ == MonitorState::Calibrating) {
        throw Error(ErrorCode::CalibrationFailed,
                    "stream ended after " + std::to_string(*last_t_ - calibration_start_) +
                        " ms of calibration");
    }
}

std::vector<MonitorEvent> run_monitor(std::span<const LandmarkFrame> frames, const MonitorConfig& config,
                                      std::shared_ptr<const KnnModel> model)
{
    Monitor monitor(config, std::move(model));
    std::vector<MonitorEvent> events;
    for (const auto& f : frames) {
        auto out = monitor.push(f);
        events.insert(events.end(), std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
    }
    monitor.finish();
    return events;
}

} // namespace alertmon
