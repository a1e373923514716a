#include "alertmon/serialization.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "alertmon/error.hpp"

namespace alertmon {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Shortest representation that round-trips, matching the JSON output.
std::string number(double v)
{
    return json(v).dump();
}

template <typename Fn>
auto parse_guarded(const std::string& what, Fn&& fn)
{
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, what + ": " + e.what());
    }
}

AlertnessLabel label_from_int(int v)
{
    if (v != 0 && v != 1)
        throw Error(ErrorCode::ParseError, "label must be 0 or 1");
    return static_cast<AlertnessLabel>(v);
}

} // namespace

std::string format_feature_line(const FrameFeatures& f)
{
    ordered_json j;
    j["frame"] = f.frame_index;
    j["t_ms"] = f.t_ms;
    j["ear"] = f.features.ear();
    j["mar"] = f.features.mar();
    j["puc"] = f.features.puc();
    j["moe"] = f.features.moe();
    j["normalized"] = f.features.normalized;
    return j.dump();
}

FrameFeatures parse_feature_line(std::string_view line)
{
    return parse_guarded("feature line", [&] {
        const json j = json::parse(line);
        FrameFeatures f;
        f.frame_index = j.at("frame").get<std::uint64_t>();
        f.t_ms = j.at("t_ms").get<std::int64_t>();
        f.features[Feature::Ear] = j.at("ear").get<double>();
        f.features[Feature::Mar] = j.at("mar").get<double>();
        f.features[Feature::Puc] = j.at("puc").get<double>();
        f.features[Feature::Moe] = j.at("moe").get<double>();
        f.features.normalized = j.at("normalized").get<bool>();
        return f;
    });
}

std::string feature_csv_header()
{
    return "frame,t_ms,ear,mar,puc,moe,normalized";
}

std::string format_feature_csv(const FrameFeatures& f)
{
    std::ostringstream os;
    os << f.frame_index << ',' << f.t_ms;
    for (double v : f.features.values)
        os << ',' << number(v);
    os << ',' << (f.features.normalized ? "true" : "false");
    return os.str();
}

ordered_json baseline_to_json(const BaselineStats& b)
{
    ordered_json j;
    j["subject_id"] = b.subject_id;
    j["mean"] = b.mean;
    j["std"] = b.std;
    j["n_frames"] = b.n_frames;
    return j;
}

BaselineStats baseline_from_json(const json& j)
{
    return parse_guarded("baseline", [&] {
        BaselineStats b;
        b.subject_id = j.value("subject_id", std::string());
        b.mean = j.at("mean").get<std::array<double, kFeatureCount>>();
        b.std = j.at("std").get<std::array<double, kFeatureCount>>();
        b.n_frames = j.value("n_frames", std::size_t{0});
        for (double s : b.std)
            if (!(s >= 0.0))
                throw Error(ErrorCode::ParseError, "baseline std must be non-negative");
        return b;
    });
}

ordered_json model_to_json(const KnnModel& model)
{
    ordered_json j;
    j["version"] = KnnModel::kVersion;
    j["feature_mask"] = model.mask().names();
    j["k"] = model.k();
    if (model.baseline)
        j["baseline"] = baseline_to_json(*model.baseline);
    ordered_json vectors = ordered_json::array();
    ordered_json labels = ordered_json::array();
    for (std::size_t i = 0; i < model.size(); ++i) {
        const auto v = model.train_vector(i);
        vectors.push_back(std::vector<double>(v.begin(), v.end()));
        labels.push_back(static_cast<int>(model.labels()[i]));
    }
    j["train"]["vectors"] = std::move(vectors);
    j["train"]["labels"] = std::move(labels);
    return j;
}

KnnModel model_from_json(const json& j)
{
    return parse_guarded("model", [&] {
        const auto version = j.at("version").get<std::string>();
        if (version != KnnModel::kVersion)
            throw Error(ErrorCode::ParseError, "unsupported model version '" + version + "'");
        std::string mask_text;
        for (const auto& name : j.at("feature_mask"))
            mask_text += name.get<std::string>() + ",";
        const FeatureMask mask = FeatureMask::parse(mask_text);
        const auto k = j.at("k").get<std::size_t>();

        std::vector<double> matrix;
        for (const auto& row : j.at("train").at("vectors")) {
            if (row.size() != mask.size())
                throw Error(ErrorCode::DimensionMismatch, "training row width differs from mask");
            for (const auto& x : row)
                matrix.push_back(x.get<double>());
        }
        std::vector<AlertnessLabel> labels;
        for (const auto& l : j.at("train").at("labels"))
            labels.push_back(label_from_int(l.get<int>()));

        KnnModel model(mask, k, std::move(matrix), std::move(labels));
        if (j.contains("baseline") && !j["baseline"].is_null())
            model.baseline = baseline_from_json(j["baseline"]);
        return model;
    });
}

void save_model(const KnnModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << model_to_json(model).dump() << '\n';
}

KnnModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open model " + path.string());
    const json j = parse_guarded(path.string(), [&] { return json::parse(in); });
    return model_from_json(j);
}

ordered_json metrics_to_json(const MetricsReport& m)
{
    ordered_json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["confusion"] = {{"tp", m.confusion.tp()}, {"fp", m.confusion.fp()},
                      {"fn", m.confusion.fn()}, {"tn", m.confusion.tn()}};
    j["positive_class"] = to_string(m.positive_class);
    return j;
}

std::string format_metrics_text(const MetricsReport& m)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << std::left << std::setw(12) << "accuracy" << m.accuracy << '\n'
       << std::setw(12) << "precision" << m.precision << '\n'
       << std::setw(12) << "recall" << m.recall << '\n'
       << std::setw(12) << "f1" << m.f1 << '\n'
       << std::setw(12) << "tp/fp" << m.confusion.tp() << '/' << m.confusion.fp() << '\n'
       << std::setw(12) << "fn/tn" << m.confusion.fn() << '/' << m.confusion.tn() << '\n';
    return os.str();
}

std::string format_event_line(const MonitorEvent& e)
{
    ordered_json j;
    j["t_ms"] = e.t_ms;
    j["kind"] = to_string(e.kind);
    if (e.state)
        j["state"] = to_string(*e.state);
    if (e.score)
        j["score"] = *e.score;
    if (e.baseline)
        j["baseline"] = baseline_to_json(*e.baseline);
    return j.dump();
}

MonitorEvent parse_event_line(std::string_view line)
{
    return parse_guarded("event line", [&] {
        const json j = json::parse(line);
        MonitorEvent e;
        e.t_ms = j.at("t_ms").get<std::int64_t>();
        const auto kind = j.at("kind").get<std::string>();
        bool known = false;
        for (auto k : {EventKind::CalibrationStarted, EventKind::CalibrationComplete, EventKind::StateDecision,
                       EventKind::RepositionCue, EventKind::FaceReacquired, EventKind::LowAlertnessAlert}) {
            if (kind == to_string(k)) {
                e.kind = k;
                known = true;
            }
        }
        if (!known)
            throw Error(ErrorCode::ParseError, "unknown event kind '" + kind + "'");
        if (j.contains("state")) {
            const auto s = j["state"].get<std::string>();
            if (s != "ALERT" && s != "DROWSY")
                throw Error(ErrorCode::ParseError, "unknown state '" + s + "'");
            e.state = s == "DROWSY" ? AlertnessLabel::Drowsy : AlertnessLabel::Alert;
        }
        if (j.contains("score"))
            e.score = j["score"].get<double>();
        if (j.contains("baseline"))
            e.baseline = baseline_from_json(j["baseline"]);
        return e;
    });
}

ordered_json profile_to_json(const SynthProfile& p)
{
    ordered_json j;
    j["seed"] = p.seed;
    j["fps"] = p.fps;
    j["duration_s"] = p.duration_s;
    j["base_eye_openness"] = p.base_eye_openness;
    j["base_mouth_openness"] = p.base_mouth_openness;
    j["blink_rate_hz"] = p.blink_rate_hz;
    j["blink_duration_ms"] = p.blink_duration_ms;
    j["yawn_rate_per_min"] = p.yawn_rate_per_min;
    j["yawn_duration_ms"] = p.yawn_duration_ms;
    j["drowsy_ear_scale"] = p.drowsy_ear_scale;
    j["drowsy_mar_scale"] = p.drowsy_mar_scale;
    j["jitter_px"] = p.jitter_px;
    j["face_gaps"] = ordered_json::array();
    for (const auto& g : p.face_gaps)
        j["face_gaps"].push_back({{"start_ms", g.start_ms}, {"duration_ms", g.duration_ms}});
    return j;
}

SynthProfile profile_from_json(const json& j)
{
    return parse_guarded("profile", [&] {
        SynthProfile p;
        p.seed = j.value("seed", p.seed);
        p.fps = j.value("fps", p.fps);
        p.duration_s = j.value("duration_s", p.duration_s);
        p.base_eye_openness = j.value("base_eye_openness", p.base_eye_openness);
        p.base_mouth_openness = j.value("base_mouth_openness", p.base_mouth_openness);
        p.blink_rate_hz = j.value("blink_rate_hz", p.blink_rate_hz);
        p.blink_duration_ms = j.value("blink_duration_ms", p.blink_duration_ms);
        p.yawn_rate_per_min = j.value("yawn_rate_per_min", p.yawn_rate_per_min);
        p.yawn_duration_ms = j.value("yawn_duration_ms", p.yawn_duration_ms);
        p.drowsy_ear_scale = j.value("drowsy_ear_scale", p.drowsy_ear_scale);
        p.drowsy_mar_scale = j.value("drowsy_mar_scale", p.drowsy_mar_scale);
        p.jitter_px = j.value("jitter_px", p.jitter_px);
        if (j.contains("face_gaps"))
            for (const auto& g : j["face_gaps"])
                p.face_gaps.push_back({g.at("start_ms").get<std::int64_t>(), g.at("duration_ms").get<std::int64_t>()});
        p.validate();
        return p;
    });
}

ordered_json truth_to_json(const std::string& session_id, AlertnessLabel label, const SynthProfile& p)
{
    ordered_json j;
    j["session"] = session_id;
    j["label"] = static_cast<int>(label);
    j["profile"] = profile_to_json(p);
    return j;
}

std::string format_feature_sweep_csv(const std::vector<FeatureSweepRow>& rows)
{
    std::ostringstream os;
    os << "mask,accuracy,precision,recall,f1,tp,fp,fn,tn\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        os << r.mask.label() << ',' << number(m.accuracy) << ',' << number(m.precision) << ','
           << number(m.recall) << ',' << number(m.f1) << ',' << m.confusion.tp() << ',' << m.confusion.fp()
           << ',' << m.confusion.fn() << ',' << m.confusion.tn() << '\n';
    }
    return os.str();
}

std::string format_k_sweep_csv(const SweepKResult& result)
{
    std::ostringstream os;
    os << "k,accuracy,precision,recall,f1\n";
    for (const auto& r : result.rows) {
        const auto& m = r.metrics;
        os << r.k << ',' << number(m.accuracy) << ',' << number(m.precision) << ',' << number(m.recall) << ','
           << number(m.f1) << '\n';
    }
    return os.str();
}

std::string format_state_statistics(const StateStatistics& st)
{
    std::ostringstream os;
    os << std::fixed << std::left << std::setw(8) << "" << std::right;
    for (Feature f : kAllFeatures)
        os << std::setw(10) << (std::string(to_string(f)) + " mean") << std::setw(10) << "std";
    os << '\n';
    auto row = [&](const char* name, const auto& mean, const auto* std) {
        os << std::left << std::setw(8) << name << std::right;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            os << std::setw(10) << std::setprecision(4) << mean[f];
            if (std)
                os << std::setw(10) << std::setprecision(4) << (*std)[f];
            else
                os << std::setw(10) << "";
        }
        os << '\n';
    };
    row("Alert", st.alert_mean, &st.alert_std);
    row("Drowsy", st.drowsy_mean, &st.drowsy_std);
    os << std::left << std::setw(8) << "Delta" << std::right;
    for (double d : st.delta_percent) {
        std::ostringstream cell;
        cell << std::showpos << std::fixed << std::setprecision(1) << d << '%';
        os << std::setw(10) << cell.str() << std::setw(10) << "";
    }
    os << '\n';
    return os.str();
}

ordered_json state_statistics_to_json(const StateStatistics& st)
{
    ordered_json j;
    for (Feature f : kAllFeatures) {
        const auto i = static_cast<std::size_t>(f);
        j[to_string(f)] = {{"alert_mean", st.alert_mean[i]}, {"alert_std", st.alert_std[i]},
                           {"drowsy_mean", st.drowsy_mean[i]}, {"drowsy_std", st.drowsy_std[i]},
                           {"delta_percent", st.delta_percent[i]}};
    }
    j["n_alert"] = st.n_alert;
    j["n_drowsy"] = st.n_drowsy;
    return j;
}

} // namespace alertmon
