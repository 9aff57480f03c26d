#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "backcache/hierarchy.hpp"

namespace backcache {

/// Parses a JSON configuration document. Every key is optional; missing keys
/// keep the 12-16KB BackCache defaults. Unknown keys, wrong types, and
/// inconsistent values throw ConfigError.
SimConfig parse_config(std::string_view json_text);
SimConfig load_config(const std::filesystem::path& path);

/// Full document for `config`; parse_config(config_to_json(c)) == c.
nlohmann::ordered_json config_to_json(const SimConfig& config);

}  // namespace backcache
