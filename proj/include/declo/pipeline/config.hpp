#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "declo/rotation/pattern_registration.hpp"
#include "declo/translation/line_registration.hpp"

namespace declo {

/// Every pipeline tunable, with defaults. Parsed from `key = value` files
/// (# comments) and `--set key=value` overrides; unknown keys are rejected.
struct Config {
  // normal estimation
  int normals_k = 20;
  bool bilateral = true;
  double bilateral_sigma_s = 0.5;              // meters
  double bilateral_sigma_n = deg2rad(15.0);    // radians

  RotationParams rotation;
  TranslationParams translation;

  // prediction and pose graph
  int prediction_n = 2;
  int lm_max_iter = 50;
  double lm_tol = 1e-9;
  double rot_info_scale = 1.0;  // scales the rotation block of edge information
  bool graph_optimize = true;
  bool skip_edges = true;

  int ring_count = 64;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("bad value for " + key + ": " + v);
  }
}

inline long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long n = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw std::runtime_error("bad value for " + key + ": " + v);
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("bad value for " + key + ": " + v);
}

// "50:1.0,30:1.0,20:0.8"
inline std::vector<SorPass> parse_sor_schedule(const std::string& v) {
  std::vector<SorPass> schedule;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("bad value for sor_schedule: " + v);
    SorPass pass;
    pass.k = static_cast<int>(parse_int("sor_schedule", item.substr(0, colon)));
    pass.alpha = parse_double("sor_schedule", item.substr(colon + 1));
    schedule.push_back(pass);
  }
  if (schedule.empty()) throw std::runtime_error("bad value for sor_schedule: " + v);
  return schedule;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void apply_config_entry(Config& cfg, const std::string& key,
                               const std::string& value) {
  using namespace detail;
  if (key == "normals_k") cfg.normals_k = static_cast<int>(parse_int(key, value));
  else if (key == "bilateral") cfg.bilateral = parse_bool(key, value);
  else if (key == "bilateral_sigma_s") cfg.bilateral_sigma_s = parse_double(key, value);
  else if (key == "bilateral_sigma_n_deg") cfg.bilateral_sigma_n = deg2rad(parse_double(key, value));
  else if (key == "sor_schedule") cfg.rotation.sor_schedule = parse_sor_schedule(value);
  else if (key == "sor_min_retain") cfg.rotation.sor_min_retain = static_cast<int>(parse_int(key, value));
  else if (key == "sparse_threshold") cfg.rotation.sparse_threshold = static_cast<int>(parse_int(key, value));
  else if (key == "theta_window_deg") cfg.rotation.theta_window = deg2rad(parse_double(key, value));
  else if (key == "grid_n") cfg.rotation.grid_n = static_cast<int>(parse_int(key, value));
  else if (key == "ms_max_iter") cfg.rotation.ms_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "ms_eps") cfg.rotation.ms_eps = parse_double(key, value);
  else if (key == "gather_radius") cfg.rotation.gather_radius = parse_double(key, value);
  else if (key == "sphere_voxel") cfg.rotation.sphere_voxel = parse_double(key, value);
  else if (key == "pattern_reg_max_iter") cfg.rotation.reg_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "pattern_reg_tol") cfg.rotation.reg_tol = parse_double(key, value);
  else if (key == "bins") cfg.translation.bins = static_cast<int>(parse_int(key, value));
  else if (key == "lines_per_cell") cfg.translation.lines_per_cell = static_cast<int>(parse_int(key, value));
  else if (key == "keep_fraction") cfg.translation.keep_fraction = parse_double(key, value);
  else if (key == "line_reg_max_iter") cfg.translation.reg_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "line_reg_tol") cfg.translation.reg_tol = parse_double(key, value);
  else if (key == "prediction_n") cfg.prediction_n = static_cast<int>(parse_int(key, value));
  else if (key == "lm_max_iter") cfg.lm_max_iter = static_cast<int>(parse_int(key, value));
  else if (key == "lm_tol") cfg.lm_tol = parse_double(key, value);
  else if (key == "rot_info_scale") cfg.rot_info_scale = parse_double(key, value);
  else if (key == "graph_optimize") cfg.graph_optimize = parse_bool(key, value);
  else if (key == "skip_edges") cfg.skip_edges = parse_bool(key, value);
  else if (key == "ring_count") cfg.ring_count = static_cast<int>(parse_int(key, value));
  else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else throw std::runtime_error("unknown config key: " + key);
}

/// `key=value` override, the CLI --set form.
inline void apply_config_override(Config& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override must be key=value: " + assignment);
  apply_config_entry(cfg, detail::trim(assignment.substr(0, eq)),
                     detail::trim(assignment.substr(eq + 1)));
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               " is not key = value");
    apply_config_entry(cfg, detail::trim(trimmed.substr(0, eq)),
                       detail::trim(trimmed.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

inline void Config::validate() const {
  auto fail = [](const std::string& what) {
    throw std::runtime_error("config out of range: " + what);
  };
  if (normals_k < 3) fail("normals_k >= 3");
  if (bilateral_sigma_s <= 0.0) fail("bilateral_sigma_s > 0");
  if (bilateral_sigma_n <= 0.0) fail("bilateral_sigma_n_deg > 0");
  if (rotation.sor_schedule.empty()) fail("sor_schedule nonempty");
  for (const SorPass& p : rotation.sor_schedule) {
    if (p.k < 1) fail("sor_schedule k >= 1");
    if (p.alpha <= 0.0) fail("sor_schedule alpha > 0");
  }
  if (rotation.sor_min_retain < 0) fail("sor_min_retain >= 0");
  if (rotation.sparse_threshold < 0) fail("sparse_threshold >= 0");
  if (rotation.theta_window <= 0.0 || rotation.theta_window >= kPi / 2.0)
    fail("theta_window_deg in (0, 90)");
  if (rotation.grid_n < 1) fail("grid_n >= 1");
  if (rotation.ms_max_iter < 1) fail("ms_max_iter >= 1");
  if (rotation.ms_eps <= 0.0) fail("ms_eps > 0");
  if (rotation.gather_radius <= 0.0) fail("gather_radius > 0");
  if (rotation.sphere_voxel <= 0.0) fail("sphere_voxel > 0");
  if (rotation.reg_max_iter < 1) fail("pattern_reg_max_iter >= 1");
  if (rotation.reg_tol <= 0.0) fail("pattern_reg_tol > 0");
  if (translation.bins < 1) fail("bins >= 1");
  if (translation.lines_per_cell < 1) fail("lines_per_cell >= 1");
  if (translation.keep_fraction <= 0.0 || translation.keep_fraction > 1.0)
    fail("keep_fraction in (0, 1]");
  if (translation.reg_max_iter < 1) fail("line_reg_max_iter >= 1");
  if (translation.reg_tol <= 0.0) fail("line_reg_tol > 0");
  if (prediction_n < 0) fail("prediction_n >= 0");
  if (lm_max_iter < 0) fail("lm_max_iter >= 0");
  if (lm_tol <= 0.0) fail("lm_tol > 0");
  if (rot_info_scale <= 0.0) fail("rot_info_scale > 0");
  if (ring_count < 2) fail("ring_count >= 2");
}

}  // namespace declo
