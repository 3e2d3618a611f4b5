#pragma once

#include <string>

#include <json.hpp>

#include "cfmimo/scenario.hpp"

namespace cfmimo {

// Key/value scenario file: one `key = value` per line, `#` comments. Keys
// map 1:1 to ScenarioConfig fields; see README for the schema.
ScenarioConfig load_config_file(const std::string& path);

// Applies a single `key=value` override (CLI --set).
void apply_override(ScenarioConfig& config, const std::string& assignment);
void apply_override(ScenarioConfig& config, const std::string& key,
                    const std::string& value);

// Convenience rules applied after parsing: K1 = 0 clears the targets and a
// single target broadcasts to all RTUs.
void normalize_targets(ScenarioConfig& config);

nlohmann::json config_to_json(const ScenarioConfig& config);

}  // namespace cfmimo
