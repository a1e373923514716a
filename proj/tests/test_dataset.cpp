#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "alertmon/dataset.hpp"
#include "alertmon/landmark_io.hpp"
#include "alertmon/synthgen.hpp"
#include "test_support.hpp"

using namespace alertmon;
namespace fs = std::filesystem;

namespace {

std::vector<LandmarkFrame> frames_at(std::int64_t start_ms, std::int64_t end_ms, std::int64_t period_ms)
{
    std::vector<LandmarkFrame> out;
    std::uint64_t index = 0;
    for (std::int64_t t = start_ms; t < end_ms; t += period_ms) {
        LandmarkFrame f;
        f.frame_index = index++;
        f.t_ms = t;
        f.face_present = true;
        f.points = template_face(0.3, 0.4);
        out.push_back(std::move(f));
    }
    return out;
}

SessionSamples make_session(const std::string& subject, const std::string& session, int kss, std::size_t n,
                            double ear, Rng& rng, double jitter = 0.3)
{
    SessionSamples s;
    s.subject_id = subject;
    s.session_id = session;
    s.kss_label = kss;
    for (std::size_t i = 0; i < n; ++i) {
        LandmarkFrame f;
        f.frame_index = i;
        f.t_ms = 40000 + static_cast<std::int64_t>(i) * 1000;
        f.face_present = true;
        f.points = template_face(ear, 0.4);
        for (auto& p : f.points)
            p = {p.x + jitter * rng.gaussian(), p.y + jitter * rng.gaussian()};
        s.frames.push_back(std::move(f));
    }
    return s;
}

Sample raw_sample(AlertnessLabel label, std::array<double, 4> raw, const std::string& subject = "a")
{
    Sample s;
    s.subject_id = subject;
    s.label = label;
    s.raw.values = raw;
    return s;
}


} // namespace

TEST_CASE("sampler takes the first frame of each second from 40 s")
{
    SUBCASE("43.5 s recording at 30 fps")
    {
        const auto frames = frames_at(0, 43500, 33);
        const auto result = sample_frames(frames);
        REQUIRE(result.frames.size() == 4);
        CHECK_FALSE(result.warning.has_value());
        for (std::size_t i = 0; i < 4; ++i) {
            const std::int64_t boundary = 40000 + static_cast<std::int64_t>(i) * 1000;
            CHECK(result.frames[i].t_ms >= boundary);
            CHECK(result.frames[i].t_ms < boundary + 33);
        }
    }
    SUBCASE("39 s recording yields nothing and a warning")
    {
        const auto result = sample_frames(frames_at(0, 39000, 33));
        CHECK(result.frames.empty());
        CHECK(result.warning.has_value());
    }
    SUBCASE("irregular timestamps stay strictly increasing")
    {
        Rng rng(8);
        std::vector<LandmarkFrame> frames;
        std::int64_t t = 0;
        for (int i = 0; i < 5000; ++i) {
            t += 1 + static_cast<std::int64_t>(rng.uniform_below(80));
            if (rng.uniform() < 0.02)
                t += 2500; // dropped seconds
            LandmarkFrame f;
            f.t_ms = t;
            frames.push_back(f);
        }
        const auto result = sample_frames(frames);
        REQUIRE_FALSE(result.frames.empty());
        std::set<std::int64_t> slots;
        for (std::size_t i = 0; i < result.frames.size(); ++i) {
            CHECK(result.frames[i].t_ms >= 40000);
            if (i > 0)
                CHECK(result.frames[i].t_ms > result.frames[i - 1].t_ms);
            CHECK(slots.insert((result.frames[i].t_ms - 40000) / 1000).second);
        }
    }
    CHECK_ERROR_CODE(FrameSampler(40.0, 0.0), ErrorCode::InvalidConfig);
}

TEST_CASE("assembly normalizes each subject against its alert session")
{
    Rng rng(2);
    std::vector<SessionSamples> sessions{
        make_session("a", "a_alert", kKssAlert, 40, 0.30, rng),
        make_session("a", "a_drowsy", kKssDrowsy, 40, 0.22, rng),
        make_session("b", "b_alert", kKssAlert, 40, 0.36, rng),
        make_session("b", "b_drowsy", kKssDrowsy, 40, 0.27, rng),
    };
    const Dataset ds = assemble_dataset(sessions);
    CHECK(ds.samples.size() == 160);
    REQUIRE(ds.baselines.size() == 2);
    CHECK(ds.baselines.at("a").n_frames == 30);
    CHECK(ds.baselines.at("a").mean[0] == doctest::Approx(0.30).epsilon(0.02));
    CHECK(ds.baselines.at("b").mean[0] == doctest::Approx(0.36).epsilon(0.02));

    // The first 30 alert frames normalize to zero mean, unit std.
    for (const char* subject : {"a", "b"}) {
        double sum = 0.0, ss = 0.0;
        std::vector<double> z;
        for (const auto& s : ds.samples)
            if (s.subject_id == subject && s.label == AlertnessLabel::Alert && z.size() < 30)
                z.push_back(s.normalized.ear());
        for (double v : z)
            sum += v;
        const double mean = sum / 30.0;
        for (double v : z)
            ss += (v - mean) * (v - mean);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(ss / 30.0) - 1.0) < 1e-9);
    }

    SUBCASE("frame-level split is 80/20 within one sample")
    {
        const auto split = split_dataset(ds.samples, {SplitMode::FrameLevel, 0.8, 7});
        CHECK(split.train.size() + split.test.size() == 160);
        CHECK(std::abs(static_cast<double>(split.train.size()) - 128.0) <= 1.0);
        const auto again = split_dataset(ds.samples, {SplitMode::FrameLevel, 0.8, 7});
        REQUIRE(again.train.size() == split.train.size());
        for (std::size_t i = 0; i < split.train.size(); ++i)
            CHECK(again.train[i].t_ms == split.train[i].t_ms);
    }
    SUBCASE("subject-level split keeps subjects apart")
    {
        const auto split = split_dataset(ds.samples, {SplitMode::SubjectLevel, 0.8, 7});
        REQUIRE_FALSE(split.train.empty());
        REQUIRE_FALSE(split.test.empty());
        std::set<std::string> train_subjects, test_subjects;
        for (const auto& s : split.train)
            train_subjects.insert(s.subject_id);
        for (const auto& s : split.test)
            test_subjects.insert(s.subject_id);
        for (const auto& s : train_subjects)
            CHECK_FALSE(test_subjects.contains(s));
    }
    CHECK_ERROR_CODE(split_dataset(ds.samples, {SplitMode::FrameLevel, 1.0, 0}), ErrorCode::InvalidConfig);
}

TEST_CASE("assembly edge cases")
{
    Rng rng(4);
    SUBCASE("subject without an alert session")
    {
        std::vector<SessionSamples> sessions{make_session("a", "a_drowsy", kKssDrowsy, 40, 0.22, rng)};
        CHECK_ERROR_CODE(assemble_dataset(sessions), ErrorCode::MissingAlertBaseline);
    }
    SUBCASE("too few alert frames for a baseline")
    {
        std::vector<SessionSamples> sessions{make_session("a", "a_alert", kKssAlert, 10, 0.3, rng)};
        CHECK_ERROR_CODE(assemble_dataset(sessions), ErrorCode::InsufficientBaseline);
    }
    SUBCASE("low-vigilant sessions are excluded unless requested")
    {
        std::vector<SessionSamples> sessions{
            make_session("a", "a_alert", kKssAlert, 30, 0.3, rng),
            make_session("a", "a_low", kKssLowVigilant, 30, 0.26, rng),
        };
        CHECK(assemble_dataset(sessions).samples.size() == 30);
        DatasetOptions options;
        options.include_labels.insert(kKssLowVigilant);
        const auto ds = assemble_dataset(sessions, options);
        CHECK(ds.samples.size() == 60);
        CHECK(std::count_if(ds.samples.begin(), ds.samples.end(),
                            [](const Sample& s) { return s.label == AlertnessLabel::Drowsy; }) == 30);
    }
    SUBCASE("warnings are carried through")
    {
        auto short_session = make_session("a", "a_drowsy", kKssDrowsy, 0, 0.2, rng);
        short_session.warning = "too short";
        std::vector<SessionSamples> sessions{make_session("a", "a_alert", kKssAlert, 30, 0.3, rng), short_session};
        const auto ds = assemble_dataset(sessions);
        REQUIRE(ds.warnings.size() == 1);
        CHECK(ds.warnings[0].find("a_drowsy") != std::string::npos);
    }
}

TEST_CASE("feature sweep on an EAR-separable set")
{
    Rng rng(6);
    std::vector<SessionSamples> sessions;
    for (int s = 0; s < 4; ++s) {
        const std::string id = "s" + std::to_string(s);
        sessions.push_back(make_session(id, id + "_alert", kKssAlert, 60, 0.30, rng, 0.1));
        sessions.push_back(make_session(id, id + "_drowsy", kKssDrowsy, 60, 0.20, rng, 0.1));
    }
    const auto ds = assemble_dataset(sessions);
    const auto split = split_dataset(ds.samples, {SplitMode::FrameLevel, 0.8, 1});
    const auto rows = sweep_features(split.train, split.test, 5);
    REQUIRE(rows.size() == 15);
    const auto masks = all_feature_masks();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mask == masks[i]);
        const auto& c = rows[i].metrics.confusion;
        CHECK(c.total() == split.test.size());
        if (rows[i].mask.contains(Feature::Ear))
            CHECK(rows[i].metrics.accuracy == doctest::Approx(1.0));
    }
    CHECK_ERROR_CODE(sweep_features(split.train, std::vector<Sample>{}, 5), ErrorCode::EmptyTestSet);
}

TEST_CASE("state statistics")
{
    const std::vector<Sample> samples{
        raw_sample(AlertnessLabel::Alert, {0.30, 0.40, 0.80, 1.0}),
        raw_sample(AlertnessLabel::Alert, {0.34, 0.44, 0.84, 1.2}),
        raw_sample(AlertnessLabel::Drowsy, {0.24, 0.44, 0.70, 2.0}),
        raw_sample(AlertnessLabel::Drowsy, {0.26, 0.46, 0.72, 2.4}),
    };
    const auto st = state_statistics(samples);
    CHECK(st.n_alert == 2);
    CHECK(st.n_drowsy == 2);
    CHECK(st.alert_mean[0] == doctest::Approx(0.32));
    CHECK(st.alert_std[0] == doctest::Approx(0.02));
    CHECK(st.drowsy_mean[3] == doctest::Approx(2.2));
    CHECK(st.drowsy_std[3] == doctest::Approx(0.2));
    CHECK(st.delta_percent[0] == doctest::Approx(-21.875));
    CHECK(st.delta_percent[3] == doctest::Approx(100.0));

    const std::vector<Sample> one_class(samples.begin(), samples.begin() + 2);
    CHECK_ERROR_CODE(state_statistics(one_class), ErrorCode::MissingClass);
}

TEST_CASE("detection rate")
{
    auto frames = frames_at(0, 1000, 100);
    CHECK(detection_rate(frames) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < frames.size(); i += 2) {
        frames[i].face_present = false;
        frames[i].points.clear();
    }
    CHECK(detection_rate(frames) == doctest::Approx(0.5));
    frames[1].points[36] = frames[1].points[39]; // degenerate eye
    CHECK(detection_rate(frames) == doctest::Approx(0.4));
    CHECK_ERROR_CODE(detection_rate(std::vector<LandmarkFrame>{}), ErrorCode::EmptySession);
}

TEST_CASE("manifest loading and dataset build from a written corpus")
{
    testing::TempDir dir("alertmon-dataset");
    CorpusOptions options;
    options.subjects = 3;
    options.base.duration_s = 75.0;
    const auto corpus = generate_corpus(options);
    const fs::path manifest_path = write_corpus(corpus, dir.path);

    const auto manifest = load_manifest(manifest_path);
    REQUIRE(manifest.entries.size() == 6);
    CHECK(manifest.entries[0].subject_id == "s01");
    CHECK(manifest.entries[0].label == kKssAlert);
    CHECK(manifest.entries[1].label == kKssDrowsy);
    CHECK(fs::exists(manifest.entries[0].landmarks));
    CHECK(manifest.entries[0].fps == doctest::Approx(24.0));

    const auto ds = load_dataset(manifest);
    // 75 s sessions sampled at 1 Hz from 40 s.
    CHECK(ds.samples.size() == 6 * 35);
    CHECK(ds.baselines.size() == 3);
    CHECK(ds.warnings.empty());

    const auto split = build_dataset(manifest, {SplitMode::SubjectLevel, 0.67, 3});
    CHECK(split.train.size() + split.test.size() == ds.samples.size());

    SUBCASE("bad manifests")
    {
        const fs::path bad = dir.path / "bad.json";
        std::ofstream(bad) << R"({"entries":[{"subject":"x","session":"y","label":3,"landmarks":"landmarks/s01_alert.jsonl"}]})";
        CHECK_ERROR_CODE(load_manifest(bad), ErrorCode::ParseError);
        std::ofstream(bad) << R"({"entries":[{"subject":"x","session":"y","label":0,"landmarks":"nope.jsonl"}]})";
        CHECK_ERROR_CODE(load_manifest(bad), ErrorCode::IoError);
        std::ofstream(bad) << "{not json";
        CHECK_ERROR_CODE(load_manifest(bad), ErrorCode::ParseError);
        CHECK_ERROR_CODE(load_manifest(dir.path / "missing.json"), ErrorCode::IoError);
    }
}
