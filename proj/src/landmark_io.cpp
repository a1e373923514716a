#include "alertmon/landmark_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "alertmon/error.hpp"
#include "json.hpp"

namespace alertmon {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& msg)
{
    throw Error(ErrorCode::ParseError, msg);
}

double finite_number(const json& v, const char* what)
{
    if (!v.is_number())
        fail(std::string(what) + " is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        fail(std::string(what) + " is not finite");
    return d;
}

std::int64_t non_negative_int(const json& v, const char* what)
{
    if (!v.is_number_integer())
        fail(std::string(what) + " is not an integer");
    if (v.is_number_unsigned())
        return static_cast<std::int64_t>(v.get<std::uint64_t>());
    const auto i = v.get<std::int64_t>();
    if (i < 0)
        fail(std::string(what) + " is negative");
    return i;
}

} // namespace

LandmarkFrame parse_landmark_line(std::string_view line)
{
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        fail(e.what());
    }
    if (!doc.is_object())
        fail("line is not a JSON object");

    for (const auto& [key, _] : doc.items()) {
        if (key != "frame" && key != "t_ms" && key != "face" && key != "conf" && key != "points")
            fail("unknown key '" + key + "'");
    }
    for (const char* key : {"frame", "t_ms", "face"}) {
        if (!doc.contains(key))
            fail(std::string("missing key '") + key + "'");
    }

    LandmarkFrame frame;
    frame.frame_index = static_cast<std::uint64_t>(non_negative_int(doc["frame"], "frame"));
    frame.t_ms = non_negative_int(doc["t_ms"], "t_ms");
    if (!doc["face"].is_boolean())
        fail("face is not a boolean");
    frame.face_present = doc["face"].get<bool>();

    if (doc.contains("conf")) {
        const double c = finite_number(doc["conf"], "conf");
        if (c < 0.0 || c > 1.0)
            fail("conf outside [0,1]");
        frame.confidence = c;
    }

    if (frame.face_present) {
        if (!doc.contains("points"))
            fail("face frame without points");
        const auto& pts = doc["points"];
        if (!pts.is_array() || pts.size() != kLandmarkCount)
            fail("points must be an array of 68 [x,y] pairs");
        frame.points.reserve(kLandmarkCount);
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != 2)
                fail("point is not an [x,y] pair");
            frame.points.push_back({finite_number(p[0], "x"), finite_number(p[1], "y")});
        }
    } else if (doc.contains("points") && !doc["points"].is_array()) {
        fail("points is not an array");
    }
    return frame;
}

std::string format_landmark_line(const LandmarkFrame& frame)
{
    ordered_json doc;
    doc["frame"] = frame.frame_index;
    doc["t_ms"] = frame.t_ms;
    doc["face"] = frame.face_present;
    if (frame.confidence)
        doc["conf"] = *frame.confidence;
    if (frame.face_present) {
        auto pts = ordered_json::array();
        for (const auto& p : frame.points)
            pts.push_back({p.x, p.y});
        doc["points"] = std::move(pts);
    }
    return doc.dump();
}

std::optional<LandmarkFrame> LandmarkReader::next()
{
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            return parse_landmark_line(line);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_) + ": " + e.what());
        }
    }
    return std::nullopt;
}

std::vector<LandmarkFrame> read_landmarks(std::istream& in)
{
    LandmarkReader reader(in);
    std::vector<LandmarkFrame> frames;
    while (auto f = reader.next())
        frames.push_back(std::move(*f));
    return frames;
}

std::vector<LandmarkFrame> read_landmarks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return read_landmarks(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_landmarks(std::ostream& out, const std::vector<LandmarkFrame>& frames)
{
    for (const auto& f : frames)
        out << format_landmark_line(f) << '\n';
}

void write_landmarks(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_landmarks(out, frames);
}

} // namespace alertmon
