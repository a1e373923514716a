#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alertmon/types.hpp"

namespace alertmon {

// Landmark JSON Lines wire format, one frame per line:
//   {"frame":<int>,"t_ms":<int>,"face":<bool>,"conf":<float>?,"points":[[x,y]x68]?}
// "points" is written only for face frames, "conf" only when known.

LandmarkFrame parse_landmark_line(std::string_view line);
std::string format_landmark_line(const LandmarkFrame& frame);

// Streaming reader; blank lines are skipped, parse errors carry the line number.
class LandmarkReader {
public:
    explicit LandmarkReader(std::istream& in) : in_(in) {}

    std::optional<LandmarkFrame> next();
    std::size_t line_number() const noexcept { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

std::vector<LandmarkFrame> read_landmarks(std::istream& in);
std::vector<LandmarkFrame> read_landmarks(const std::filesystem::path& path);
void write_landmarks(std::ostream& out, const std::vector<LandmarkFrame>& frames);
void write_landmarks(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames);

} // namespace alertmon
