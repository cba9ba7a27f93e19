#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "inflection/panel_synth.hpp"

namespace inflection {

/// Reads and validates a JSON scenario. Malformed JSON, unknown keys and
/// wrongly typed fields raise ParseError; invariant failures raise the
/// validation error of the violated rule.
ScenarioConfig parse_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario_text(const std::string& text);

std::string serialize_scenario(const ScenarioConfig& config);
void write_scenario(const std::filesystem::path& path, const ScenarioConfig& config);

}  // namespace inflection
