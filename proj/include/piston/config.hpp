#pragma once

// JSON run configuration: system fields at top level plus optional
// "initial", "compact_set", "study" and "npiston" sections. Unknown keys are
// rejected with a ConfigError naming the offending field.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "piston/averaged.hpp"
#include "piston/core.hpp"

namespace piston {

struct StudyConfig {
  std::vector<double> epsilon_list{0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> delta_list{0.0};
  std::size_t n_phases = 16;
  double delta_fixed = 0.025;  // comparison: delta held fixed in the eps sweep
  std::size_t samples_per_unit = 512;
  int steps_per_skin = 1000;
  double rtol = 1e-10;
  double duration = 0.0;  // audit run length in micro-time; 0 = horizon_T / epsilon
  std::size_t phase = 0;  // phase index used by simulate
};

struct NPistonConfig {
  avg::NPistonState state;
  double T = 1.0;
};

struct RunConfig {
  SystemConfig system;
  std::optional<SlowState> initial;
  CompactSet compact_set;
  StudyConfig study;
  std::optional<NPistonConfig> npiston;
};

// Parses JSON text, applying "dotted.key=value" overrides first (values are
// read as JSON when possible, as strings otherwise). Throws ConfigError.
RunConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Fully resolved configuration as pretty-printed JSON.
std::string to_json(const RunConfig& cfg);

}  // namespace piston
