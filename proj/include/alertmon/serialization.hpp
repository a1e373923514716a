#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alertmon/classifier.hpp"
#include "alertmon/dataset.hpp"
#include "alertmon/features.hpp"
#include "alertmon/pipeline.hpp"
#include "alertmon/synthgen.hpp"
#include "json.hpp"

namespace alertmon {

// Feature dump: {"frame","t_ms","ear","mar","puc","moe","normalized"}
std::string format_feature_line(const FrameFeatures& f);
FrameFeatures parse_feature_line(std::string_view line);
std::string feature_csv_header();
std::string format_feature_csv(const FrameFeatures& f);

nlohmann::ordered_json baseline_to_json(const BaselineStats& b);
BaselineStats baseline_from_json(const nlohmann::json& j);

// {"version":"1","feature_mask":[...],"k":K,"baseline":{...}?,"train":{"vectors":[[...]],"labels":[0|1]}}
nlohmann::ordered_json model_to_json(const KnnModel& model);
KnnModel model_from_json(const nlohmann::json& j);
void save_model(const KnnModel& model, const std::filesystem::path& path);
KnnModel load_model(const std::filesystem::path& path);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);
// Aligned two-column text block.
std::string format_metrics_text(const MetricsReport& m);

// {"t_ms":<int>,"kind":<str>,"state":"ALERT"|"DROWSY"?,"score":<float>?,"baseline":{...}?}
std::string format_event_line(const MonitorEvent& e);
MonitorEvent parse_event_line(std::string_view line);

nlohmann::ordered_json profile_to_json(const SynthProfile& p);
SynthProfile profile_from_json(const nlohmann::json& j);
nlohmann::ordered_json truth_to_json(const std::string& session_id, AlertnessLabel label, const SynthProfile& p);

// CSV columns: mask,accuracy,precision,recall,f1,tp,fp,fn,tn
std::string format_feature_sweep_csv(const std::vector<FeatureSweepRow>& rows);
// CSV columns: k,accuracy,precision,recall,f1
std::string format_k_sweep_csv(const SweepKResult& result);

std::string format_state_statistics(const StateStatistics& st);
nlohmann::ordered_json state_statistics_to_json(const StateStatistics& st);

} // namespace alertmon
