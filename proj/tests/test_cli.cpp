#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "alertmon/landmark_io.hpp"
#include "alertmon/serialization.hpp"
#include "test_support.hpp"

using namespace alertmon;
namespace fs = std::filesystem;

namespace {

// Runs the CLI with stderr discarded; returns its exit status.
int run(const std::string& args)
{
    const std::string cmd = std::string(ALERTMON_CLI) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines_of(const fs::path& path)
{
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            out.push_back(line);
    return out;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("cli workflows on a small synthetic corpus")
{
    testing::TempDir dir("alertmon-cli");
    const fs::path d = dir.path;
    {
        std::ofstream cfg(d / "synth.toml");
        cfg << "[synth]\nduration_s = 75  # seconds\nsubjects = 3\njitter_px = \"0.4\"\n";
    }
    REQUIRE(run("synth --out " + (d / "corpus").string() + " --config " + (d / "synth.toml").string()) == 0);
    const fs::path manifest = d / "corpus" / "manifest.json";
    REQUIRE(fs::exists(manifest));
    const auto session = d / "corpus" / "landmarks" / "s01_drowsy.jsonl";
    CHECK(lines_of(session).size() == 75 * 24);

    SUBCASE("features")
    {
        REQUIRE(run("features --in " + session.string() + " --out " + (d / "f.jsonl").string()) == 0);
        const auto rows = lines_of(d / "f.jsonl");
        REQUIRE(rows.size() == 75 * 24);
        const auto first = parse_feature_line(rows.front());
        CHECK(first.frame_index == 0);
        CHECK_FALSE(first.features.normalized);
        CHECK(first.features.ear() > 0.1);
    }
    SUBCASE("baseline then normalized features")
    {
        const auto alert = d / "corpus" / "landmarks" / "s01_alert.jsonl";
        REQUIRE(run("baseline --in " + alert.string() + " --out " + (d / "b.json").string()) == 0);
        REQUIRE(run("features --in " + alert.string() + " --baseline " + (d / "b.json").string() +
                    " --format csv --out " + (d / "f.csv").string()) == 0);
        const auto rows = lines_of(d / "f.csv");
        CHECK(rows.front() == feature_csv_header());
        CHECK(rows[1].ends_with(",true"));
    }
    SUBCASE("sweep-k writes one row per k")
    {
        REQUIRE(run("sweep-k --manifest " + manifest.string() + " --kmax 45 --mask EAR,MAR,PUC,MOE --out " +
                    (d / "k.csv").string() + " --report " + (d / "k.json").string()) == 0);
        const auto rows = lines_of(d / "k.csv");
        REQUIRE(rows.size() == 46);
        CHECK(rows[0] == "k,accuracy,precision,recall,f1");
        CHECK(rows[45].starts_with("45,"));
        const auto report = nlohmann::json::parse(slurp(d / "k.json"));
        CHECK(report.at("best_k").get<int>() >= 1);
        CHECK(report.at("best_k").get<int>() <= 45);
    }
    SUBCASE("sweep-features writes 15 rows")
    {
        REQUIRE(run("sweep-features --manifest " + manifest.string() + " --k 10 --out " + (d / "s.csv").string()) == 0);
        const auto rows = lines_of(d / "s.csv");
        REQUIRE(rows.size() == 16);
        CHECK(rows[1].starts_with("EAR,"));
        CHECK(rows[15].starts_with("EAR+MAR+PUC+MOE,"));
    }
    SUBCASE("train, predict and monitor")
    {
        const auto model = d / "m.json";
        REQUIRE(run("train --manifest " + manifest.string() + " --out " + model.string() +
                    " --mask MAR,MOE --k 15 --split subject --seed 3 --metrics " + (d / "metrics.json").string()) == 0);
        const auto loaded = load_model(model);
        CHECK(loaded.k() == 15);
        CHECK(loaded.mask().label() == "MAR+MOE");
        CHECK(nlohmann::json::parse(slurp(d / "metrics.json")).contains("accuracy"));

        REQUIRE(run("predict --model " + model.string() + " --manifest " + manifest.string() +
                    " --split subject --seed 3 --out " + (d / "p.txt").string()) == 0);
        CHECK(slurp(d / "p.txt").find("accuracy") != std::string::npos);

        REQUIRE(run("monitor --in " + session.string() + " --model " + model.string() + " --events " +
                    (d / "ev.jsonl").string()) == 0);
        const auto events = lines_of(d / "ev.jsonl");
        REQUIRE(events.size() > 2);
        CHECK(parse_event_line(events[0]).kind == EventKind::CalibrationStarted);
        CHECK(parse_event_line(events[1]).kind == EventKind::CalibrationComplete);

        // Same inputs, same bytes.
        REQUIRE(run("monitor --in " + session.string() + " --model " + model.string() + " --events " +
                    (d / "ev2.jsonl").string()) == 0);
        CHECK(slurp(d / "ev.jsonl") == slurp(d / "ev2.jsonl"));

        const std::string stdin_cmd = "monitor --in - --mode deviation < " + session.string() + " > " +
                                      (d / "ev3.jsonl").string();
        REQUIRE(run(stdin_cmd) == 0);
        CHECK(lines_of(d / "ev3.jsonl").size() > 2);
    }
    SUBCASE("split is deterministic in the seed")
    {
        REQUIRE(run("split --manifest " + manifest.string() + " --seed 9 --out " + (d / "a.json").string()) == 0);
        REQUIRE(run("split --manifest " + manifest.string() + " --seed 9 --out " + (d / "b.json").string()) == 0);
        REQUIRE(run("split --manifest " + manifest.string() + " --seed 10 --out " + (d / "c.json").string()) == 0);
        CHECK(slurp(d / "a.json") == slurp(d / "b.json"));
        CHECK(slurp(d / "a.json") != slurp(d / "c.json"));
        const auto j = nlohmann::json::parse(slurp(d / "a.json"));
        CHECK(j.at("train").size() + j.at("test").size() == 6 * 35);
    }
    SUBCASE("stats and detection rate")
    {
        REQUIRE(run("stats --manifest " + manifest.string() + " --json --out " + (d / "st.json").string()) == 0);
        CHECK(nlohmann::json::parse(slurp(d / "st.json")).is_object());
        REQUIRE(run("detection-rate --manifest " + manifest.string() + " --out " + (d / "dr.csv").string()) == 0);
        const auto rows = lines_of(d / "dr.csv");
        REQUIRE(rows.size() == 7);
        CHECK(rows[1] == "s01_alert,1800,1800,1");
    }
    SUBCASE("single synthetic session with truth")
    {
        REQUIRE(run("synth --label drowsy --seed 5 --out " + (d / "one.jsonl").string() + " --truth " +
                    (d / "one.truth.json").string()) == 0);
        const auto truth = nlohmann::json::parse(slurp(d / "one.truth.json"));
        CHECK(truth.at("label") == 1);
        CHECK(truth.at("profile").at("seed") == 5);
        CHECK(read_landmarks(d / "one.jsonl").size() == 120 * 24);
    }
}

TEST_CASE("cli exit codes")
{
    testing::TempDir dir("alertmon-cli-errors");
    const fs::path d = dir.path;
    CHECK(run("") == 2);
    CHECK(run("no-such-command") == 2);
    CHECK(run("features") == 2);
    CHECK(run("features --in x.jsonl --bogus") == 2);
    CHECK(run("sweep-k --manifest /nonexistent.json") == 2);
    CHECK(run("--help > /dev/null") == 0);

    {
        std::ofstream cfg(d / "bad.toml");
        cfg << "[monitor]\nsmoothing_window = 10\n";
    }
    CHECK(run("synth --out " + (d / "c").string() + " --config " + (d / "bad.toml").string()) == 2);
    {
        std::ofstream cfg(d / "bad2.toml");
        cfg << "[monitor]\nsmoothing_window_frames = 0\n";
    }
    CHECK(run("monitor --in - --config " + (d / "bad2.toml").string() + " < /dev/null") == 2);
    {
        std::ofstream cfg(d / "bad3.toml");
        cfg << "[synth]\nfps = -3\n";
    }
    CHECK(run("synth --out " + (d / "c").string() + " --config " + (d / "bad3.toml").string()) == 2);

    // Runtime failures.
    CHECK(run("features --in " + (d / "missing.jsonl").string()) == 1);
    {
        std::ofstream bad(d / "bad.jsonl");
        bad << "{\"frame\":0,\"t_ms\":0,\"face\":true}\n";
    }
    CHECK(run("features --in " + (d / "bad.jsonl").string()) == 1);
    REQUIRE(run("synth --label alert --out " + (d / "short.jsonl").string() + " --config " +
                (d / "short.toml").string()) == 2); // config file missing
    {
        std::ofstream cfg(d / "short.toml");
        cfg << "[synth]\nduration_s = 10\n";
    }
    REQUIRE(run("synth --label alert --out " + (d / "short.jsonl").string() + " --config " +
                (d / "short.toml").string()) == 0);
    CHECK(run("monitor --in " + (d / "short.jsonl").string() + " --events " + (d / "ev.jsonl").string()) == 1);
}
