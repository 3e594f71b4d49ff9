// Experiment configuration and the command pipelines behind the tool
// surface. A config is a flat JSON object checked against a closed key
// schema; each command resolves frames, models, and sampling parameters
// from it, runs the construction, and emits a deterministic report.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "report.hpp"

namespace srgeo {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  nlohmann::json raw;

  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool truthy(const std::string& key, bool fallback) const;
  std::vector<double> num_list(const std::string& key,
                               const std::vector<double>& fallback) const;
  double tolerance(const std::string& key, double fallback) const;
};

// Rejects non-objects, unknown keys, and type mismatches.
ExperimentConfig make_config(const nlohmann::json& j);

const std::vector<std::string>& command_names();

struct RunOutcome {
  int exit_code = 0;  // 0, or 3 under strict with a failing check
  nlohmann::json report;
  std::vector<std::string> artifacts;
  std::string summary;
};

// Dispatches one command. Config-shaped problems throw ConfigError;
// math-layer failures propagate as their own exception types. Check
// outcomes land in report["body"]["checks"] and only influence the exit
// code under strict.
RunOutcome run_command(const std::string& command,
                       const ExperimentConfig& cfg);

}  // namespace srgeo
