#pragma once

// YAML scenario configs. Angles are given in degrees; everything is converted
// to radians on load. Unknown keys are rejected so typos do not silently fall
// back to defaults.

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "covrage/harness.hpp"

namespace covrage::cli {

struct LoadedConfig {
  std::string path;
  Scenario scenario;
  McsTable table = default_mcs_table();
  std::string table_source = "builtin:802.11ad";
  std::string rotation_source;  // "explicit", "reference:A", "random:<seed>:<length>"
};

namespace detail {

inline std::string where(const LoadedConfig& cfg, const YAML::Node& node, const std::string& field) {
  const YAML::Mark m = node.Mark();
  std::string loc = cfg.path;
  if (m.line >= 0) loc += ":" + std::to_string(m.line + 1);
  return loc + ": field '" + field + "'";
}

inline void check_keys(const LoadedConfig& cfg, const YAML::Node& map, const std::string& prefix,
                       std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) throw ConfigError(where(cfg, map, prefix) + ": expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError(where(cfg, kv.first, prefix.empty() ? key : prefix + "." + key) + ": unknown key");
  }
}

template <class T>
T scalar(const LoadedConfig& cfg, const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(where(cfg, node, field) + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(cfg, node, field) + ": cannot parse '" + node.Scalar() + "'");
  }
}

template <class T>
void read_opt(const LoadedConfig& cfg, const YAML::Node& map, const char* key, const std::string& prefix, T& out) {
  if (const YAML::Node n = map[key]) out = scalar<T>(cfg, n, prefix + "." + key);
}

inline std::vector<double> number_list(const LoadedConfig& cfg, const YAML::Node& node, const std::string& field,
                                       std::size_t count) {
  if (!node.IsSequence() || node.size() != count)
    throw ConfigError(where(cfg, node, field) + ": expected a list of " + std::to_string(count) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(scalar<double>(cfg, node[i], field));
  return out;
}

// Either {euler_deg: [yaw, pitch, roll]} or {quaternion: [w, x, y, z]}.
inline Quaternion orientation(const LoadedConfig& cfg, const YAML::Node& node, const std::string& field) {
  check_keys(cfg, node, field, {"euler_deg", "quaternion"});
  if (node["euler_deg"] && node["quaternion"])
    throw ConfigError(where(cfg, node, field) + ": give either euler_deg or quaternion, not both");
  if (const YAML::Node e = node["euler_deg"]) {
    const auto a = number_list(cfg, e, field + ".euler_deg", 3);
    return euler_to_quat({deg_to_rad(a[0]), deg_to_rad(a[1]), deg_to_rad(a[2])});
  }
  if (const YAML::Node q = node["quaternion"]) {
    const auto a = number_list(cfg, q, field + ".quaternion", 4);
    const Quaternion raw{a[0], a[1], a[2], a[3]};
    if (std::abs(raw.norm() - 1.0) > 1e-6)
      throw ConfigError(where(cfg, q, field + ".quaternion") + ": quaternion is not unit length");
    return raw.normalized();
  }
  throw ConfigError(where(cfg, node, field) + ": missing euler_deg or quaternion");
}

inline void read_array(LoadedConfig& cfg, const YAML::Node& node) {
  check_keys(cfg, node, "array", {"nx", "ny", "spacing_wavelengths", "frequency_hz", "interleave", "phase_bits"});
  Scenario& sc = cfg.scenario;
  read_opt(cfg, node, "nx", "array", sc.array.nx);
  read_opt(cfg, node, "ny", "array", sc.array.ny);
  read_opt(cfg, node, "spacing_wavelengths", "array", sc.array.spacing_wavelengths);
  read_opt(cfg, node, "frequency_hz", "array", sc.array.frequency_hz);
  read_opt(cfg, node, "interleave", "array", sc.interleave);
  read_opt(cfg, node, "phase_bits", "array", sc.phase_bits);
  try {
    sc.array.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where(cfg, node, "array") + ": " + e.what());
  }
}

inline void read_link(LoadedConfig& cfg, const YAML::Node& node) {
  check_keys(cfg, node, "link",
             {"eirp_dbm", "eirp_limit_dbm", "distance_m", "path_loss_exponent", "reference_distance_m",
              "reference_loss_db", "headroom_db", "mcs_table"});
  LinkParams& l = cfg.scenario.link;
  read_opt(cfg, node, "eirp_dbm", "link", l.eirp_dbm);
  read_opt(cfg, node, "eirp_limit_dbm", "link", l.eirp_limit_dbm);
  read_opt(cfg, node, "distance_m", "link", l.distance_m);
  read_opt(cfg, node, "path_loss_exponent", "link", l.path_loss_exponent);
  read_opt(cfg, node, "reference_distance_m", "link", l.reference_distance_m);
  read_opt(cfg, node, "headroom_db", "link", l.headroom_db);
  if (const YAML::Node n = node["reference_loss_db"]) {
    if (n.IsScalar() && n.Scalar() == "friis") l.reference_loss_db.reset();
    else l.reference_loss_db = scalar<double>(cfg, n, "link.reference_loss_db");
  }
  if (const YAML::Node n = node["mcs_table"]) {
    std::filesystem::path p = scalar<std::string>(cfg, n, "link.mcs_table");
    if (p.is_relative()) p = std::filesystem::path(cfg.path).parent_path() / p;
    cfg.table = load_mcs_table(p.string());
    cfg.table_source = p.lexically_normal().generic_string();
  }
  l.frequency_hz = cfg.scenario.array.frequency_hz;
  try {
    l.validate();
  } catch (const std::runtime_error& e) {
    throw ConfigError(where(cfg, node, "link") + ": " + e.what());
  }
}

inline void read_rotation(LoadedConfig& cfg, const YAML::Node& node) {
  check_keys(cfg, node, "rotation", {"q1", "q2", "ap_uv", "ap_euler_deg", "reference", "random"});
  Scenario& sc = cfg.scenario;
  const int modes = (node["reference"] ? 1 : 0) + (node["random"] ? 1 : 0) + (node["q1"] || node["q2"] ? 1 : 0);
  if (modes != 1)
    throw ConfigError(where(cfg, node, "rotation") + ": give exactly one of q1/q2, reference or random");

  HeadRotation h;
  if (const YAML::Node r = node["reference"]) {
    const std::string which = scalar<std::string>(cfg, r, "rotation.reference");
    if (which != "A" && which != "B")
      throw ConfigError(where(cfg, r, "rotation.reference") + ": expected A or B, got '" + which + "'");
    h = reference_rotation(which[0]);
    cfg.rotation_source = "reference:" + which;
  } else if (const YAML::Node r = node["random"]) {
    check_keys(cfg, r, "rotation.random", {"seed", "length"});
    if (!r["seed"] || !r["length"]) throw ConfigError(where(cfg, r, "rotation.random") + ": needs seed and length");
    const auto seed = scalar<std::uint64_t>(cfg, r["seed"], "rotation.random.seed");
    const double length = scalar<double>(cfg, r["length"], "rotation.random.length");
    h = random_head_rotation(seed, length);
    cfg.rotation_source = "random:" + std::to_string(seed) + ":" + r["length"].Scalar();
  } else {
    if (!node["q1"] || !node["q2"]) throw ConfigError(where(cfg, node, "rotation") + ": both q1 and q2 are required");
    h.q1 = orientation(cfg, node["q1"], "rotation.q1");
    h.q2 = orientation(cfg, node["q2"], "rotation.q2");
    if (node["ap_uv"] && node["ap_euler_deg"])
      throw ConfigError(where(cfg, node, "rotation") + ": give either ap_uv or ap_euler_deg, not both");
    if (const YAML::Node a = node["ap_uv"]) {
      const auto uv = number_list(cfg, a, "rotation.ap_uv", 2);
      h.ap_dir = {uv[0], uv[1]};
      if (!h.ap_dir.valid()) throw InvalidUvError(where(cfg, a, "rotation.ap_uv") + ": not a valid UV coordinate");
    } else if (const YAML::Node a = node["ap_euler_deg"]) {
      const auto e = number_list(cfg, a, "rotation.ap_euler_deg", 2);
      h.ap_dir = euler_to_uv({deg_to_rad(e[0]), deg_to_rad(e[1]), 0.0});
    } else {
      throw ConfigError(where(cfg, node, "rotation") + ": missing ap_uv or ap_euler_deg");
    }
    cfg.rotation_source = "explicit";
  }
  sc.q1 = h.q1;
  sc.q2 = h.q2;
  sc.ap_dir = h.ap_dir;
}

}  // namespace detail

inline LoadedConfig parse_config(const std::string& text, const std::string& path) {
  LoadedConfig cfg;
  cfg.path = path;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ConfigError(path + ": top level must be a mapping");
  detail::check_keys(cfg, root, "",
                     {"array", "link", "rotation", "samples", "strategy", "ablation", "seed", "penalty_grid"});

  Scenario& sc = cfg.scenario;
  if (const YAML::Node n = root["array"]) detail::read_array(cfg, n);
  if (const YAML::Node n = root["link"]) detail::read_link(cfg, n);
  else sc.link.frequency_hz = sc.array.frequency_hz;
  if (!root["rotation"]) throw ConfigError(path + ": field 'rotation' is required");
  detail::read_rotation(cfg, root["rotation"]);

  detail::read_opt(cfg, root, "samples", "", sc.samples);
  detail::read_opt(cfg, root, "seed", "", sc.seed);
  detail::read_opt(cfg, root, "penalty_grid", "", sc.penalty_grid);
  if (const YAML::Node n = root["strategy"]) {
    try {
      sc.strategy = parse_strategy(detail::scalar<std::string>(cfg, n, "strategy"));
    } catch (const ConfigError& e) {
      throw ConfigError(detail::where(cfg, n, "strategy") + ": " + e.what());
    }
  }
  if (const YAML::Node n = root["ablation"]) {
    try {
      sc.ablation = parse_ablation(detail::scalar<std::string>(cfg, n, "ablation"));
    } catch (const ConfigError& e) {
      throw ConfigError(detail::where(cfg, n, "ablation") + ": " + e.what());
    }
  }
  try {
    sc.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace covrage::cli
