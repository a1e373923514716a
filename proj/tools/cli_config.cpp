#include "cli_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <functional>
#include <map>
#include <sstream>
#include <type_traits>

namespace alertmon::cli {

namespace pt = boost::property_tree;

namespace {

std::string unquote(std::string v)
{
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front())
        return v.substr(1, v.size() - 2);
    return v;
}

template <typename T>
T parse_value(const std::string& key, const std::string& raw)
{
    if constexpr (std::is_unsigned_v<T>) {
        if (!raw.empty() && raw.front() == '-')
            throw UsageError("config key '" + key + "': must be non-negative, got '" + raw + "'");
    }
    std::istringstream in(raw);
    T value{};
    if (!(in >> value) || !(in >> std::ws).eof())
        throw UsageError("config key '" + key + "': cannot parse '" + raw + "'");
    return value;
}

bool parse_bool(const std::string& key, const std::string& raw)
{
    if (raw == "true")
        return true;
    if (raw == "false")
        return false;
    throw UsageError("config key '" + key + "': expected true or false, got '" + raw + "'");
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

template <typename T>
Setter set(T& field)
{
    return [&field](const std::string& key, const std::string& v) { field = parse_value<T>(key, v); };
}

std::map<std::string, std::map<std::string, Setter>> setters(Settings& s)
{
    auto& m = s.monitor;
    auto& p = s.corpus.base;
    return {
        {"monitor",
         {
             {"calibration_duration_ms", set(m.calibration_duration_ms)},
             {"smoothing_window_frames", set(m.smoothing_window_frames)},
             {"decision_stride_frames", set(m.decision_stride_frames)},
             {"face_lost_threshold_ms", set(m.face_lost_threshold_ms)},
             {"decision_mode", [&m](const std::string&, const std::string& v) { m.decision_mode = parse_mode(v); }},
             {"deviation_threshold_z", set(m.deviation_threshold_z)},
             {"min_valid_fraction", set(m.min_valid_fraction)},
             {"validity_span_ms", set(m.validity_span_ms)},
             {"escalation_windows", set(m.escalation_windows)},
             {"baseline_frames", set(m.baseline.frames)},
             {"baseline_min_frames", set(m.baseline.min_frames)},
             {"subject_id", [&m](const std::string&, const std::string& v) { m.subject_id = v; }},
         }},
        {"split",
         {
             {"mode", [&s](const std::string&, const std::string& v) { s.split.mode = parse_split_mode(v); }},
             {"train_fraction", set(s.split.train_fraction)},
             {"seed", set(s.split.seed)},
         }},
        {"dataset",
         {
             {"include_low_vigilant",
              [&s](const std::string& key, const std::string& v) {
                  if (parse_bool(key, v))
                      s.dataset.include_labels.insert(kKssLowVigilant);
                  else
                      s.dataset.include_labels.erase(kKssLowVigilant);
              }},
             {"sample_start_s", set(s.dataset.sample_start_s)},
             {"sample_rate_hz", set(s.dataset.sample_rate_hz)},
             {"baseline_frames", set(s.dataset.baseline.frames)},
             {"baseline_min_frames", set(s.dataset.baseline.min_frames)},
         }},
        {"synth",
         {
             {"seed", set(p.seed)},
             {"fps", set(p.fps)},
             {"duration_s", set(p.duration_s)},
             {"base_eye_openness", set(p.base_eye_openness)},
             {"base_mouth_openness", set(p.base_mouth_openness)},
             {"blink_rate_hz", set(p.blink_rate_hz)},
             {"blink_duration_ms", set(p.blink_duration_ms)},
             {"yawn_rate_per_min", set(p.yawn_rate_per_min)},
             {"yawn_duration_ms", set(p.yawn_duration_ms)},
             {"drowsy_ear_scale", set(p.drowsy_ear_scale)},
             {"drowsy_mar_scale", set(p.drowsy_mar_scale)},
             {"jitter_px", set(p.jitter_px)},
             {"subjects", set(s.corpus.subjects)},
             {"subject_variation", set(s.corpus.subject_variation)},
         }},
    };
}

} // namespace

DecisionMode parse_mode(const std::string& s)
{
    if (s == "knn")
        return DecisionMode::Knn;
    if (s == "deviation")
        return DecisionMode::BaselineDeviation;
    throw UsageError("mode must be knn or deviation, got '" + s + "'");
}

SplitMode parse_split_mode(const std::string& s)
{
    if (s == "frame")
        return SplitMode::FrameLevel;
    if (s == "subject")
        return SplitMode::SubjectLevel;
    throw UsageError("split must be frame or subject, got '" + s + "'");
}

void apply_config_file(const std::filesystem::path& path, Settings& settings)
{
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    auto table = setters(settings);
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (sec == table.end() || !body.data().empty())
            throw UsageError("config " + path.string() + ": unknown section '" + section + "'");
        for (const auto& [key, node] : body) {
            const auto it = sec->second.find(key);
            if (it == sec->second.end())
                throw UsageError("config " + path.string() + ": unknown key '" + section + "." + key + "'");
            // Strip trailing comments and TOML-style quoting.
            std::string value = node.data();
            if (const auto hash = value.find(" #"); hash != std::string::npos)
                value.erase(hash);
            while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back())))
                value.pop_back();
            it->second(section + "." + key, unquote(value));
        }
    }
}

} // namespace alertmon::cli
