#pragma once

#include <string>

#include "orelnav/sim_harness.hpp"

namespace orelnav {

// Sectioned key=value scenario files ([scene] [plan] [imu] [poet] [filter]
// [run]). Parsing is strict: unknown sections or keys are hard errors so
// misspellings never fall back to defaults silently.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

// Apply one "section.key=value" override (same key set as the file).
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

// The built-in arc-inspection defaults, also the base of every parse.
ScenarioConfig default_scenario();

}  // namespace orelnav
