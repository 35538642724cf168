#pragma once

// Run configuration files: `key = value` lines grouped under `[section]`
// headers, `#` or `;` comments. Every key is validated before anything runs.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "chemolimit/dynamics.hpp"
#include "chemolimit/error.hpp"
#include "chemolimit/experiments.hpp"

namespace chemo {

/// Malformed or inconsistent configuration; `key()` names the offender as
/// `section.key` (or the file path when the file itself is the problem).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what) : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Raw `section.key -> value` map in file order of first appearance.
using IniMap = std::map<std::string, std::string>;
IniMap parse_ini(const std::string& text, const std::string& origin = "<config>");
IniMap read_ini_file(const std::string& path);

struct RunConfig {
  SweepConfig sweep;           ///< grid, times, data presets, sweep list (if any)
  bool has_sweep = false;      ///< a [sweep] section was present
  Regime regime = Full{0.1, 1.0};  ///< single-trajectory regime for simulate / energy-check
  std::size_t stride = 10;     ///< observer stride for simulate
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double noise = 0.0;          ///< relative random perturbation of n0
  Profile c0_single;           ///< c0 / w0 for single runs; unset = manifold data
  Profile w0_single;
  bool c0_on_manifold = true;
  bool w0_on_manifold = true;
};

/// Builds and validates a RunConfig from parsed keys.
RunConfig build_run_config(const IniMap& ini);
RunConfig load_run_config(const std::string& path);

/// Initial state for a single trajectory: n0 from the preset (with optional
/// seeded noise), c0/w0 from their presets or from the regime's manifold.
State single_run_initial_state(const RunConfig& cfg, const GridPtr& grid);

}  // namespace chemo
