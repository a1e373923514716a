// alertmon: command-line front end for feature extraction, training,
// evaluation, live monitoring and synthetic data generation.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "alertmon/dataset.hpp"
#include "alertmon/error.hpp"
#include "alertmon/landmark_io.hpp"
#include "alertmon/pipeline.hpp"
#include "alertmon/serialization.hpp"
#include "alertmon/synthgen.hpp"
#include "cli_config.hpp"

namespace fs = std::filesystem;
using namespace alertmon;
using cli::UsageError;
using nlohmann::ordered_json;

namespace {

// Output target: a file, or stdout for "-" / empty.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-")
            return;
        if (fs::path(path).has_parent_path())
            fs::create_directories(fs::path(path).parent_path());
        file_.open(path, std::ios::binary);
        if (!file_)
            throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

class Input {
public:
    explicit Input(const std::string& path)
    {
        if (path == "-")
            return;
        file_.open(path, std::ios::binary);
        if (!file_)
            throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::istream& stream() { return file_.is_open() ? file_ : std::cin; }

private:
    std::ifstream file_;
};

std::vector<LandmarkFrame> read_input(const std::string& path)
{
    Input in(path);
    try {
        return read_landmarks(in.stream());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

struct Common {
    std::string config;
    std::string in;
    std::string out;
    std::string manifest;
    std::string model;
    std::string mask = "EAR,MAR,PUC,MOE";
    std::size_t k = 38;
    std::uint64_t seed = 0;
    std::string split;
    std::string mode;
    double train_fraction = 0.0;
    cli::Settings settings;
};

FeatureMask parse_mask(const std::string& s)
{
    try {
        return FeatureMask::parse(s);
    } catch (const Error& e) {
        throw UsageError(std::string("--mask: ") + e.what());
    }
}

// Config file first, then the flags that were actually given.
void resolve(CLI::App& sub, Common& c)
{
    if (!c.config.empty())
        cli::apply_config_file(c.config, c.settings);
    auto given = [&sub](const char* name) {
        const CLI::Option* opt = sub.get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (given("--seed"))
        c.settings.split.seed = c.seed;
    if (given("--split"))
        c.settings.split.mode = cli::parse_split_mode(c.split);
    if (given("--train-fraction"))
        c.settings.split.train_fraction = c.train_fraction;
    if (given("--mode"))
        c.settings.monitor.decision_mode = cli::parse_mode(c.mode);
    try {
        c.settings.split.validate();
        c.settings.monitor.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

void add_split_flags(CLI::App* sub, Common& c)
{
    sub->add_option("--split", c.split, "frame or subject")->check(CLI::IsMember({"frame", "subject"}));
    sub->add_option("--seed", c.seed, "split seed");
    sub->add_option("--train-fraction", c.train_fraction, "share of samples (or subjects) used for training")
        ->check(CLI::Range(0.0, 1.0));
}

DatasetManifest manifest_of(const Common& c)
{
    return load_manifest(c.manifest);
}

SplitResult load_split(const Common& c)
{
    const auto dataset = load_dataset(manifest_of(c), c.settings.dataset);
    for (const auto& w : dataset.warnings)
        spdlog::warn("{}", w);
    spdlog::info("dataset samples={} subjects={}", dataset.samples.size(), dataset.baselines.size());
    auto split = split_dataset(dataset.samples, c.settings.split);
    spdlog::info("split mode={} seed={} train={} test={}",
                 c.settings.split.mode == SplitMode::FrameLevel ? "frame" : "subject", c.settings.split.seed,
                 split.train.size(), split.test.size());
    return split;
}

// --- subcommands ------------------------------------------------------------

int run_features(Common& c, const std::string& baseline_path, const std::string& format)
{
    std::optional<BaselineStats> baseline;
    if (!baseline_path.empty()) {
        std::ifstream in(baseline_path);
        if (!in)
            throw Error(ErrorCode::IoError, "cannot open " + baseline_path);
        baseline = baseline_from_json(nlohmann::json::parse(in));
    }
    Input in(c.in);
    Output out(c.out);
    LandmarkReader reader(in.stream());
    if (format == "csv")
        out.stream() << feature_csv_header() << '\n';
    std::size_t total = 0, written = 0;
    while (auto frame = reader.next()) {
        ++total;
        auto features = try_compute_features(*frame);
        if (!features)
            continue;
        FrameFeatures row{frame->frame_index, frame->t_ms, baseline ? normalize(*features, *baseline) : *features};
        out.stream() << (format == "csv" ? format_feature_csv(row) : format_feature_line(row)) << '\n';
        ++written;
    }
    spdlog::info("features frames={} valid={} skipped={}", total, written, total - written);
    return 0;
}

int run_baseline(Common& c, const std::string& subject, bool sampled)
{
    auto frames = read_input(c.in);
    if (sampled) {
        auto result = sample_frames(frames, c.settings.dataset.sample_start_s, c.settings.dataset.sample_rate_hz);
        if (result.warning)
            spdlog::warn("{}", *result.warning);
        frames = std::move(result.frames);
    }
    const auto& options = c.settings.monitor.baseline;
    std::vector<FeatureVector> valid;
    for (const auto& f : frames) {
        if (valid.size() == options.frames)
            break;
        if (auto v = try_compute_features(f))
            valid.push_back(*v);
    }
    const auto baseline = fit_baseline(valid, subject, options);
    Output out(c.out);
    out.stream() << baseline_to_json(baseline).dump(2) << '\n';
    spdlog::info("baseline subject={} frames={}", subject, baseline.n_frames);
    return 0;
}

int run_train(Common& c, bool all, const std::string& metrics_path)
{
    const FeatureMask mask = parse_mask(c.mask);
    std::vector<Sample> train_set, test_set;
    if (all) {
        auto dataset = load_dataset(manifest_of(c), c.settings.dataset);
        for (const auto& w : dataset.warnings)
            spdlog::warn("{}", w);
        train_set = std::move(dataset.samples);
    } else {
        auto split = load_split(c);
        train_set = std::move(split.train);
        test_set = std::move(split.test);
    }
    const KnnModel model = train(normalized_vectors(train_set), sample_labels(train_set), mask, c.k);
    save_model(model, c.out);
    spdlog::info("model mask={} k={} train={} path={}", mask.label(), c.k, model.size(), c.out);
    if (!test_set.empty()) {
        const auto metrics = evaluate(model, normalized_vectors(test_set), sample_labels(test_set));
        spdlog::info("test accuracy={:.4f} precision={:.4f} recall={:.4f} f1={:.4f}", metrics.accuracy,
                     metrics.precision, metrics.recall, metrics.f1);
        if (!metrics_path.empty()) {
            Output m(metrics_path);
            m.stream() << metrics_to_json(metrics).dump(2) << '\n';
        }
    }
    return 0;
}

int run_predict(Common& c, const std::string& baseline_path)
{
    const KnnModel model = load_model(c.model);
    Output out(c.out);
    if (!c.manifest.empty()) {
        const auto split = load_split(c);
        const auto metrics = evaluate(model, normalized_vectors(split.test), sample_labels(split.test));
        out.stream() << format_metrics_text(metrics);
        spdlog::info("predict accuracy={:.4f} test={}", metrics.accuracy, split.test.size());
        return 0;
    }

    std::optional<BaselineStats> baseline = model.baseline;
    if (!baseline_path.empty()) {
        std::ifstream in(baseline_path);
        if (!in)
            throw Error(ErrorCode::IoError, "cannot open " + baseline_path);
        baseline = baseline_from_json(nlohmann::json::parse(in));
    }
    if (!baseline)
        throw UsageError("predict --in needs --baseline (the model carries none)");
    Input in(c.in);
    LandmarkReader reader(in.stream());
    while (auto frame = reader.next()) {
        auto features = try_compute_features(*frame);
        if (!features)
            continue;
        const Prediction p = model.predict(normalize(*features, *baseline));
        ordered_json j;
        j["frame"] = frame->frame_index;
        j["t_ms"] = frame->t_ms;
        j["label"] = to_string(p.label);
        j["drowsy_fraction"] = p.drowsy_fraction;
        out.stream() << j.dump() << '\n';
    }
    return 0;
}

int run_sweep_k(Common& c, std::size_t kmin, std::size_t kmax, const std::string& report_path)
{
    if (kmin == 0 || kmin > kmax)
        throw UsageError("need 1 <= --kmin <= --kmax");
    const FeatureMask mask = parse_mask(c.mask);
    const auto split = load_split(c);
    const auto result = sweep_k(normalized_vectors(split.train), sample_labels(split.train),
                                normalized_vectors(split.test), sample_labels(split.test), mask, kmin, kmax);
    Output out(c.out);
    out.stream() << format_k_sweep_csv(result);
    spdlog::info("sweep-k mask={} runs={} best_k={} accuracy={:.4f}", mask.label(), result.rows.size(),
                 result.best_k, result.best_accuracy);
    if (!report_path.empty()) {
        ordered_json j;
        j["mask"] = mask.names();
        j["k_min"] = kmin;
        j["k_max"] = kmax;
        j["best_k"] = result.best_k;
        j["best_accuracy"] = result.best_accuracy;
        Output r(report_path);
        r.stream() << j.dump(2) << '\n';
    }
    return 0;
}

int run_sweep_features(Common& c)
{
    const auto split = load_split(c);
    const auto rows = sweep_features(split.train, split.test, c.k);
    Output out(c.out);
    out.stream() << format_feature_sweep_csv(rows);
    const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.metrics.accuracy < b.metrics.accuracy;
    });
    spdlog::info("sweep-features k={} best={} accuracy={:.4f}", c.k, best->mask.label(), best->metrics.accuracy);
    return 0;
}

int run_stats(Common& c, bool as_json)
{
    const auto dataset = load_dataset(manifest_of(c), c.settings.dataset);
    for (const auto& w : dataset.warnings)
        spdlog::warn("{}", w);
    const auto st = state_statistics(dataset.samples);
    Output out(c.out);
    if (as_json)
        out.stream() << state_statistics_to_json(st).dump(2) << '\n';
    else
        out.stream() << format_state_statistics(st);
    return 0;
}

int run_detection_rate(Common& c)
{
    std::vector<std::pair<std::string, fs::path>> sessions;
    if (!c.manifest.empty()) {
        for (const auto& e : manifest_of(c).entries)
            sessions.emplace_back(e.session_id, e.landmarks);
    } else {
        sessions.emplace_back(c.in == "-" ? "stdin" : fs::path(c.in).stem().string(), c.in);
    }
    Output out(c.out);
    out.stream() << "session,frames,detected,rate\n";
    for (const auto& [id, path] : sessions) {
        const auto frames = read_input(path.string());
        const double rate = detection_rate(frames);
        const auto detected = static_cast<std::size_t>(std::llround(rate * static_cast<double>(frames.size())));
        out.stream() << id << ',' << frames.size() << ',' << detected << ',' << rate << '\n';
        if (rate < 0.9)
            spdlog::warn("session {} detection rate {:.3f} below 0.90", id, rate);
    }
    return 0;
}

int run_monitor(Common& c, const std::string& events_path)
{
    std::shared_ptr<const KnnModel> model;
    if (!c.model.empty())
        model = std::make_shared<const KnnModel>(load_model(c.model));
    Monitor monitor(c.settings.monitor, model);
    spdlog::info("monitor mode={} model={}",
                 to_string(c.settings.monitor.decision_mode.value_or(
                     model ? DecisionMode::Knn : DecisionMode::BaselineDeviation)),
                 c.model.empty() ? "none" : c.model);

    Input in(c.in);
    Output out(events_path);
    LandmarkReader reader(in.stream());
    std::size_t frames = 0, alerts = 0;
    try {
        while (auto frame = reader.next()) {
            ++frames;
            for (const auto& e : monitor.push(*frame)) {
                out.stream() << format_event_line(e) << '\n';
                alerts += e.kind == EventKind::LowAlertnessAlert;
                if (e.kind != EventKind::StateDecision)
                    spdlog::info("t_ms={} event={} state={}", e.t_ms, to_string(e.kind), to_string(monitor.state()));
            }
            out.stream().flush();
        }
    } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(reader.line_number()) + ": " + e.what());
    }
    monitor.finish();
    spdlog::info("monitor frames={} alerts={} window_resets={}", frames, alerts, monitor.window_resets());
    return 0;
}

int run_synth(Common& c, const std::string& label, const std::string& truth_path)
{
    auto& corpus = c.settings.corpus;
    if (label.empty()) {
        if (c.out.empty() || c.out == "-")
            throw UsageError("synth corpus mode needs --out <dir>");
        const auto sessions = generate_corpus(corpus);
        const auto manifest = write_corpus(sessions, c.out);
        spdlog::info("synth subjects={} sessions={} manifest={}", corpus.subjects, sessions.size(), manifest.string());
        return 0;
    }
    const auto truth = label == "drowsy" ? AlertnessLabel::Drowsy : AlertnessLabel::Alert;
    const auto frames = generate_session(corpus.base, truth);
    Output out(c.out);
    write_landmarks(out.stream(), frames);
    if (!truth_path.empty()) {
        Output t(truth_path);
        const std::string id = c.out.empty() || c.out == "-" ? "session" : fs::path(c.out).stem().string();
        t.stream() << truth_to_json(id, truth, corpus.base).dump(2) << '\n';
    }
    spdlog::info("synth label={} frames={}", label, frames.size());
    return 0;
}

int run_split(Common& c)
{
    const auto split = load_split(c);
    auto rows = [](const std::vector<Sample>& samples) {
        ordered_json a = ordered_json::array();
        for (const auto& s : samples)
            a.push_back({{"subject", s.subject_id}, {"session", s.session_id}, {"frame", s.frame_index},
                         {"t_ms", s.t_ms}, {"label", static_cast<int>(s.label)}});
        return a;
    };
    ordered_json j;
    j["mode"] = c.settings.split.mode == SplitMode::FrameLevel ? "frame" : "subject";
    j["seed"] = c.settings.split.seed;
    j["train_fraction"] = c.settings.split.train_fraction;
    j["train"] = rows(split.train);
    j["test"] = rows(split.test);
    Output out(c.out);
    out.stream() << j.dump(1) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("alertmon");
    logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
    spdlog::set_default_logger(logger);

    CLI::App app{"alertmon: facial-landmark alertness monitoring"};
    app.require_subcommand(1);
    app.fallthrough();
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "warnings and errors only");

    Common c;
    std::string baseline_path, format = "jsonl", subject = "session", metrics_path, report_path, events_path = "-",
                label, truth_path;
    bool sampled = false, train_all = false, as_json = false;
    std::size_t kmin = 1, kmax = 45, subjects = 0;

    auto config_flag = [&c](CLI::App* sub) {
        sub->add_option("--config", c.config, "key=value overlay with [monitor] [split] [dataset] [synth] sections")
            ->check(CLI::ExistingFile);
    };

    auto* features = app.add_subcommand("features", "per-frame EAR/MAR/PUC/MOE dump");
    features->add_option("--in", c.in, "landmark JSONL ('-' for stdin)")->required();
    features->add_option("--out", c.out, "output path (default stdout)");
    features->add_option("--baseline", baseline_path, "baseline JSON; output is z-normalized")
        ->check(CLI::ExistingFile);
    features->add_option("--format", format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));

    auto* baseline = app.add_subcommand("baseline", "fit a calibration baseline from a session");
    baseline->add_option("--in", c.in, "landmark JSONL")->required();
    baseline->add_option("--out", c.out, "baseline JSON (default stdout)");
    baseline->add_option("--subject", subject, "subject id recorded in the baseline");
    baseline->add_flag("--sampled", sampled, "use the 1 fps dataset sampling instead of every frame");
    config_flag(baseline);

    auto* train_cmd = app.add_subcommand("train", "train a KNN model on a manifest");
    train_cmd->add_option("--manifest", c.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--out", c.out, "model JSON")->required();
    train_cmd->add_option("--mask", c.mask, "comma list of EAR,MAR,PUC,MOE");
    train_cmd->add_option("--k", c.k, "neighbours")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--all", train_all, "train on every sample instead of the split's training part");
    train_cmd->add_option("--metrics", metrics_path, "write held-out metrics JSON here");
    add_split_flags(train_cmd, c);
    config_flag(train_cmd);

    auto* predict = app.add_subcommand("predict", "evaluate a model on a split, or label a session");
    predict->add_option("--model", c.model, "model JSON")->required()->check(CLI::ExistingFile);
    auto* predict_manifest =
        predict->add_option("--manifest", c.manifest, "evaluate on the test split")->check(CLI::ExistingFile);
    auto* predict_in = predict->add_option("--in", c.in, "label every valid frame of a landmark JSONL");
    predict_manifest->excludes(predict_in);
    predict->add_option("--baseline", baseline_path, "baseline JSON for --in")->check(CLI::ExistingFile);
    predict->add_option("--out", c.out, "output path (default stdout)");
    add_split_flags(predict, c);
    config_flag(predict);

    auto* sweep_k_cmd = app.add_subcommand("sweep-k", "accuracy for every k in [kmin, kmax]");
    sweep_k_cmd->add_option("--manifest", c.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
    sweep_k_cmd->add_option("--mask", c.mask, "comma list of EAR,MAR,PUC,MOE");
    sweep_k_cmd->add_option("--kmin", kmin, "smallest k");
    sweep_k_cmd->add_option("--kmax", kmax, "largest k");
    sweep_k_cmd->add_option("--out", c.out, "CSV path (default stdout)");
    sweep_k_cmd->add_option("--report", report_path, "selected-k report JSON");
    add_split_flags(sweep_k_cmd, c);
    config_flag(sweep_k_cmd);

    auto* sweep_f = app.add_subcommand("sweep-features", "accuracy for each of the 15 feature subsets");
    sweep_f->add_option("--manifest", c.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
    sweep_f->add_option("--k", c.k, "neighbours")->check(CLI::PositiveNumber);
    sweep_f->add_option("--out", c.out, "CSV path (default stdout)");
    add_split_flags(sweep_f, c);
    config_flag(sweep_f);

    auto* stats = app.add_subcommand("stats", "per-class feature means and standard deviations");
    stats->add_option("--manifest", c.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
    stats->add_option("--out", c.out, "output path (default stdout)");
    stats->add_flag("--json", as_json, "JSON instead of a text table");
    config_flag(stats);

    auto* detection = app.add_subcommand("detection-rate", "share of frames with usable landmarks");
    auto* det_in = detection->add_option("--in", c.in, "landmark JSONL");
    auto* det_manifest =
        detection->add_option("--manifest", c.manifest, "every session of a manifest")->check(CLI::ExistingFile);
    det_in->excludes(det_manifest);
    detection->add_option("--out", c.out, "CSV path (default stdout)");

    auto* monitor = app.add_subcommand("monitor", "run the live monitor over a landmark stream");
    monitor->add_option("--in", c.in, "landmark JSONL ('-' for stdin)")->required();
    monitor->add_option("--model", c.model, "model JSON (enables knn mode)")->check(CLI::ExistingFile);
    monitor->add_option("--events", events_path, "event JSONL (default stdout)");
    monitor->add_option("--mode", c.mode, "knn or deviation")->check(CLI::IsMember({"knn", "deviation"}));
    monitor->add_option("--subject", subject, "subject id for the baseline");
    config_flag(monitor);

    auto* synth = app.add_subcommand("synth", "generate synthetic landmark sessions");
    synth->add_option("--out", c.out, "corpus directory, or session JSONL with --label")->required();
    synth->add_option("--label", label, "single session of this class")->check(CLI::IsMember({"alert", "drowsy"}));
    synth->add_option("--truth", truth_path, "truth JSON for a single session");
    synth->add_option("--subjects", subjects, "subjects in the corpus")->check(CLI::PositiveNumber);
    synth->add_option("--seed", c.seed, "generator seed");
    config_flag(synth);

    auto* split = app.add_subcommand("split", "write the train/test assignment of a manifest");
    split->add_option("--manifest", c.manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
    split->add_option("--out", c.out, "JSON path (default stdout)");
    add_split_flags(split, c);
    config_flag(split);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (verbose)
        spdlog::set_level(spdlog::level::debug);
    if (quiet)
        spdlog::set_level(spdlog::level::warn);

    CLI::App* sub = app.get_subcommands().front();
    try {
        resolve(*sub, c);
        if (sub == synth) {
            if (synth->get_option("--seed")->count() > 0)
                c.settings.corpus.base.seed = c.seed;
            if (subjects > 0)
                c.settings.corpus.subjects = subjects;
            try {
                c.settings.corpus.base.validate();
            } catch (const Error& e) {
                throw UsageError(e.what());
            }
        }
        if (sub == monitor && monitor->get_option("--subject")->count() > 0)
            c.settings.monitor.subject_id = subject;
        if (sub == predict && c.manifest.empty() && c.in.empty())
            throw UsageError("predict needs --manifest or --in");
        if (sub == detection && c.manifest.empty() && c.in.empty())
            throw UsageError("detection-rate needs --manifest or --in");

        if (sub == features)
            return run_features(c, baseline_path, format);
        if (sub == baseline)
            return run_baseline(c, subject, sampled);
        if (sub == train_cmd)
            return run_train(c, train_all, metrics_path);
        if (sub == predict)
            return run_predict(c, baseline_path);
        if (sub == sweep_k_cmd)
            return run_sweep_k(c, kmin, kmax, report_path);
        if (sub == sweep_f)
            return run_sweep_features(c);
        if (sub == stats)
            return run_stats(c, as_json);
        if (sub == detection)
            return run_detection_rate(c);
        if (sub == monitor)
            return run_monitor(c, events_path);
        if (sub == synth)
            return run_synth(c, label, truth_path);
        if (sub == split)
            return run_split(c);
    } catch (const UsageError& e) {
        spdlog::error("usage: {}", e.what());
        return 2;
    } catch (const Error& e) {
        spdlog::error("{}: {}", to_string(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 2;
}
