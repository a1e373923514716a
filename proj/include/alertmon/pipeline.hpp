#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alertmon/classifier.hpp"
#include "alertmon/features.hpp"
#include "alertmon/types.hpp"

namespace alertmon {

enum class DecisionMode { Knn, BaselineDeviation };

struct MonitorConfig {
    std::int64_t calibration_duration_ms = 30000;
    std::size_t smoothing_window_frames = 10;
    // Frames between successive decisions once the window is full; 1 = sliding.
    std::size_t decision_stride_frames = 1;
    std::int64_t face_lost_threshold_ms = 2000;
    // Unset: Knn when a model is supplied, BaselineDeviation otherwise.
    std::optional<DecisionMode> decision_mode;
    double deviation_threshold_z = 2.0;
    // Trailing-span validity check (face-present frames only).
    double min_valid_fraction = 0.5;
    std::int64_t validity_span_ms = 1000;
    // Consecutive drowsy decisions escalate once they span this many windows.
    std::size_t escalation_windows = 2;
    BaselineOptions baseline;
    std::string subject_id = "session";

    void validate() const;
};

enum class MonitorState { Calibrating, Tracking, FaceLost, LowAlertness };

enum class EventKind {
    CalibrationStarted,
    CalibrationComplete,
    StateDecision,
    RepositionCue,
    FaceReacquired,
    LowAlertnessAlert,
};

const char* to_string(MonitorState s) noexcept;
const char* to_string(EventKind k) noexcept;
const char* to_string(DecisionMode m) noexcept;

struct MonitorEvent {
    std::int64_t t_ms = 0;
    EventKind kind = EventKind::CalibrationStarted;
    std::optional<AlertnessLabel> state;
    // drowsy_fraction (knn) or normalized MOE window mean (deviation).
    std::optional<double> score;
    std::optional<BaselineStats> baseline;
};

bool operator==(const MonitorEvent& a, const MonitorEvent& b);

// Component-wise mean; all inputs must share the same normalization state.
FeatureVector smooth_window(std::span<const FeatureVector> window);

// Deterministic transducer from landmark frames to monitor events. One
// instance per session; frames must arrive in timestamp order.
//
// Calibrating -> Tracking                 CalibrationComplete
// Tracking <-> LowAlertness               LowAlertnessAlert / Alert decision
// Tracking | LowAlertness -> FaceLost     RepositionCue
// FaceLost -> Tracking                    FaceReacquired
// A face lost during calibration still cues and reacquires, but the monitor
// stays in Calibrating.
class Monitor {
public:
    explicit Monitor(MonitorConfig config, std::shared_ptr<const KnnModel> model = nullptr);

    // Events caused by this frame, in order.
    std::vector<MonitorEvent> push(const LandmarkFrame& frame);
    // Signals end of stream; throws CalibrationFailed if calibration never finished.
    void finish() const;

    MonitorState state() const noexcept { return state_; }
    const std::optional<BaselineStats>& baseline() const noexcept { return baseline_; }
    std::size_t window_size() const noexcept { return window_.size(); }
    std::size_t window_resets() const noexcept { return window_resets_; }

private:
    void complete_calibration(std::int64_t t_ms, std::vector<MonitorEvent>& out);
    void on_face_absent(std::int64_t t_ms, std::vector<MonitorEvent>& out);
    void track_validity(std::int64_t t_ms, bool valid);
    void reset_window();
    void decide(std::int64_t t_ms, std::vector<MonitorEvent>& out);

    MonitorConfig config_;
    DecisionMode mode_;
    std::shared_ptr<const KnnModel> model_;
    MonitorState state_ = MonitorState::Calibrating;

    bool started_ = false;
    std::optional<std::int64_t> last_t_;
    std::int64_t calibration_start_ = 0;
    std::vector<FeatureVector> calibration_frames_;
    std::optional<BaselineStats> baseline_;

    std::optional<std::int64_t> absent_since_;
    bool cue_emitted_ = false;

    std::deque<FeatureVector> window_;
    std::size_t frames_since_decision_ = 0;
    std::deque<std::pair<std::int64_t, bool>> validity_;
    std::size_t window_resets_ = 0;

    std::size_t drowsy_run_ = 0;
    bool escalated_ = false;
};

std::vector<MonitorEvent> run_monitor(std::span<const LandmarkFrame> frames, const MonitorConfig& config,
                                      std::shared_ptr<const KnnModel> model = nullptr);

} // namespace alertmon
