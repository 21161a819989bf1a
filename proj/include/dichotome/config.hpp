#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dichotome/scale_space.hpp"

namespace dichotome {

/// Parameters shared by the CLI commands. Loaded from a `key = value` text
/// file; flags given on the command line are applied afterwards and win.
///
///     version = 1
///     # scale space
///     sigma2_levels = [1, 2, 3, 4]
///     subsample_factors = [1, 2, 3, 4]
///     gammas = [0.25, 0.38, 0.5, 1.2, 1.8, 2, 2.4, 4]
///     t_numerator = 8.192
///     delta_t = 1
///     s = 1.41421356
///     use_scale_factor = false
///     thr_plus = 0.2
///     thr_minus = -0.2
///     palette = ["#ff0000", "#00ff00", ...]
///     # entropy
///     mesh_rows = 30
///     mesh_cols = 30
///     histogram_bins = 16
struct RunConfig {
  static constexpr int kVersion = 1;

  int version = kVersion;
  ScaleSpaceConfig scale_space;
  int mesh_rows = 30;
  int mesh_cols = 30;
  int histogram_bins = 16;

  /// Throws ConfigError.
  void validate() const;
};

/// Raw `key = value` pairs; values keep their source text (lists unparsed).
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Throws ConfigError on unknown keys, bad values or a version mismatch.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical text form; parse_run_config(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& cfg);

/// "0.5:0.05:1.5" (inclusive range) or "0.5,0.9,1.1" or a single value.
std::vector<double> parse_gamma_list(const std::string& text);

/// "30x30" or "30".
std::pair<int, int> parse_mesh(const std::string& text);

}  // namespace dichotome
