#pragma once

#include <optional>
#include <string>

#include "ftn/engine.hpp"

namespace ftn::scenario {

struct Loaded {
    engine::Scenario scenario;
    std::optional<std::string> trace_path;  // from the optional "output" section
};

// Parses and validates a scenario document (JSON, UTF-8). Collects every
// violation and throws engine::ValidationError with the full list; unknown
// keys are violations. See docs/scenario.md for the schema.
Loaded parse(const std::string& json_text);

// Same, reading the document from a file. Throws std::runtime_error when
// the file cannot be read.
Loaded load_file(const std::string& path);

// Human-readable run report: aggregate counts, latency stats and one line
// per message. Stable output, no timestamps.
std::string summary_text(const engine::RunResult& result);

}  // namespace ftn::scenario
