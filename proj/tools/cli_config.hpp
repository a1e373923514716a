#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "alertmon/dataset.hpp"
#include "alertmon/pipeline.hpp"
#include "alertmon/synthgen.hpp"

namespace alertmon::cli {

// Bad flags or config: exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Settings that a --config file may overlay. Flags given on the command line
// win over the file.
struct Settings {
    MonitorConfig monitor;
    SplitSpec split;
    DatasetOptions dataset;
    CorpusOptions corpus;
};

// INI/TOML-style file with [monitor], [split], [dataset] and [synth]
// sections of key = value lines. Unknown sections or keys are errors.
void apply_config_file(const std::filesystem::path& path, Settings& settings);

DecisionMode parse_mode(const std::string& s);
SplitMode parse_split_mode(const std::string& s);

} // namespace alertmon::cli
