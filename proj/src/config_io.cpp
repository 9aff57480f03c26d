#include "backcache/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "backcache/error.hpp"

namespace backcache {

namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& obj, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read_uint(const Json& obj, const char* key, T& out, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_unsigned()) {
    throw ConfigError(std::string(where) + "." + key + " must be a non-negative integer");
  }
  out = it->get<T>();
}

std::string read_string(const Json& obj, const char* key, std::string fallback,
                        std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ConfigError(std::string(where) + "." + key + " must be a string");
  return it->get<std::string>();
}

CacheGeometry read_geometry(const Json& obj, CacheGeometry geo, std::string_view where) {
  reject_unknown(obj, where,
                 {"line_size_bytes", "num_sets", "associativity", "hit_latency_cycles"});
  read_uint(obj, "line_size_bytes", geo.line_size_bytes, where);
  read_uint(obj, "num_sets", geo.num_sets, where);
  read_uint(obj, "associativity", geo.associativity, where);
  read_uint(obj, "hit_latency_cycles", geo.hit_latency_cycles, where);
  return geo;
}

nlohmann::ordered_json geometry_json(const CacheGeometry& geo) {
  nlohmann::ordered_json j;
  j["line_size_bytes"] = geo.line_size_bytes;
  j["num_sets"] = geo.num_sets;
  j["associativity"] = geo.associativity;
  j["hit_latency_cycles"] = geo.hit_latency_cycles;
  return j;
}

}  // namespace

SimConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config",
                 {"mode", "l1d", "l2", "backup", "memory_penalty_cycles", "seed", "resize"});

  SimConfig cfg;
  const std::string mode = read_string(doc, "mode", "backcache", "config");
  if (mode == "baseline") {
    cfg.mode = Mode::baseline;
  } else if (mode != "backcache") {
    throw ConfigError("config.mode must be 'baseline' or 'backcache', got '" + mode + "'");
  }
  if (auto it = doc.find("l1d"); it != doc.end()) cfg.l1d = read_geometry(*it, cfg.l1d, "l1d");
  if (auto it = doc.find("l2"); it != doc.end()) cfg.l2 = read_geometry(*it, cfg.l2, "l2");
  if (auto it = doc.find("backup"); it != doc.end()) {
    reject_unknown(*it, "backup", {"capacity_lines", "min_lines", "max_lines"});
    read_uint(*it, "capacity_lines", cfg.backup_capacity_lines, "backup");
    read_uint(*it, "min_lines", cfg.backup_min_lines, "backup");
    read_uint(*it, "max_lines", cfg.backup_max_lines, "backup");
  }
  read_uint(doc, "memory_penalty_cycles", cfg.memory_penalty_cycles, "config");
  read_uint(doc, "seed", cfg.seed, "config");
  if (auto it = doc.find("resize"); it != doc.end()) {
    reject_unknown(*it, "resize", {"mode", "threshold"});
    const std::string rmode = read_string(*it, "mode", "dynamic", "resize");
    if (rmode == "fixed") {
      cfg.resize_mode = ResizeMode::fixed;
    } else if (rmode != "dynamic") {
      throw ConfigError("resize.mode must be 'dynamic' or 'fixed', got '" + rmode + "'");
    }
    read_uint(*it, "threshold", cfg.fixed_threshold, "resize");
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json config_to_json(const SimConfig& config) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(config.mode));
  j["l1d"] = geometry_json(config.l1d);
  j["l2"] = geometry_json(config.l2);
  j["backup"] = {{"capacity_lines", config.backup_capacity_lines},
                 {"min_lines", config.backup_min_lines},
                 {"max_lines", config.backup_max_lines}};
  j["memory_penalty_cycles"] = config.memory_penalty_cycles;
  j["seed"] = config.seed;
  j["resize"] = {{"mode", std::string(to_string(config.resize_mode))},
                 {"threshold", config.fixed_threshold}};
  return j;
}

}  // namespace backcache
