#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "faris/experiments.hpp"

namespace faris {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ScenarioSpec {
  std::string name;
  Mode mode = Mode::kFaris;
  SweepVar sweep_var = SweepVar::kNone;
  std::vector<double> sweep_values{0.0};
  int trials = 1;
  bool has_master_seed = false;
  std::uint64_t master_seed = 0;
};

struct Config {
  ExperimentBase base;
  std::uint64_t seed = 1;
  int threads = 1;
  int bfs_trials = 10;  // paired trials for bfs-compare
  std::vector<ScenarioSpec> scenarios;
};

/// Parses YAML text, applying `key.path=value` overrides first. Unknown keys
/// and malformed values raise ConfigError with the offending line.
Config parse_config(const std::string& yaml_text, const std::vector<std::string>& overrides = {});
/// Reads a YAML file; an empty path means built-in defaults.
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// YAML text of the built-in defaults, every key present.
std::string default_config_yaml();

/// Resolves a named scenario against the base settings. Scenarios without an
/// explicit master_seed inherit the top-level seed.
Scenario make_scenario(const Config& cfg, const std::string& name);

}  // namespace faris
