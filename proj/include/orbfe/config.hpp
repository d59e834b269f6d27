#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "orbfe/errors.hpp"
#include "orbfe/extractor.hpp"
#include "orbfe/matcher.hpp"

namespace orbfe {

/// Everything a dataset-driven command needs. Populated from defaults, then
/// an optional config file, then command-line flags, in that order.
struct RunConfig {
  std::string dataset_dir;
  std::string output_dir = "out";
  std::string calib_path;  // empty: use <dataset_dir>/calib.txt when present
  ExtractorConfig extractor;
  SearchStrip strip;
  MatcherConfig matcher;
  double depth_min = 0.1;  // meters, effective-depth range (exclusive)
  double depth_max = 50.0;
  int threads = 0;  // 0: one worker per hardware thread
  int frames = 0;   // 0: process every frame found
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("bad integer for " + key + ": " + value);
  return static_cast<int>(v);
}

inline double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("bad number for " + key + ": " + value);
  return v;
}

}  // namespace detail

inline ArithMode parse_arith_mode(const std::string& value) {
  if (value == "float") return ArithMode::kFloat;
  if (value == "fixed8") return ArithMode::kFixed8;
  throw ConfigError("arith_mode must be float or fixed8, got: " + value);
}

inline const char* arith_mode_name(ArithMode m) {
  return m == ArithMode::kFloat ? "float" : "fixed8";
}

/// Applies one key/value pair. The key set is fixed; anything else is a
/// config error.
inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
  if (key == "dataset_dir") cfg.dataset_dir = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "calib") cfg.calib_path = value;
  else if (key == "fast_threshold") cfg.extractor.fast_threshold = detail::parse_int(key, value);
  else if (key == "max_features_per_level")
    cfg.extractor.max_features_per_level = detail::parse_int(key, value);
  else if (key == "arith_mode") cfg.extractor.arith_mode = parse_arith_mode(value);
  else if (key == "scale_factor") cfg.extractor.scale_factor = detail::parse_double(key, value);
  else if (key == "row_tolerance") cfg.strip.row_tolerance = detail::parse_int(key, value);
  else if (key == "min_disparity") cfg.strip.min_disparity = detail::parse_int(key, value);
  else if (key == "max_disparity") cfg.strip.max_disparity = detail::parse_int(key, value);
  else if (key == "max_hamming") cfg.matcher.max_hamming = detail::parse_int(key, value);
  else if (key == "sad_slide") cfg.matcher.sad_slide = detail::parse_int(key, value);
  else if (key == "depth_min") cfg.depth_min = detail::parse_double(key, value);
  else if (key == "depth_max") cfg.depth_max = detail::parse_double(key, value);
  else if (key == "threads") cfg.threads = detail::parse_int(key, value);
  else if (key == "frames") cfg.frames = detail::parse_int(key, value);
  else throw ConfigError("unknown config key: " + key);
}

/// Line-based `key = value` file. Blank lines and lines starting with #
/// are skipped.
inline void load_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
}

/// Calibration file: same line format, keys `fx` and `baseline`.
inline StereoCalib load_calib(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file: " + path.string());
  StereoCalib calib;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key == "fx") calib.fx = detail::parse_double(key, value);
    else if (key == "baseline") calib.baseline = detail::parse_double(key, value);
    else throw ConfigError("unknown calibration key: " + key);
  }
  if (!calib.valid()) throw ConfigError("calibration must set positive fx and baseline");
  return calib;
}

}  // namespace orbfe
