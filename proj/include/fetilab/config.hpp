#pragma once

#include "fetilab/bdd.hpp"
#include "fetilab/feti.hpp"
#include "fetilab/problem.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fetilab {

enum class SolverKind { feti, bdd };
enum class ProblemKind { grid, spring2 };

/// One experiment: problem description, solver choice and output paths.
/// Read from a flat `key = value` file; see README for the key list.
struct ExperimentConfig {
  std::string name;
  ProblemKind problem = ProblemKind::grid;
  ProblemSpec spec;  // spec.grid.elements is derived from subdomain_elements
  GridIndex subdomain_elements{6, 6, 1};
  // spring2 fixture
  double k1 = 1.0;
  double k2 = 1.0;
  double end_load = 1.0;
  double interface_load = 0.0;

  SolverKind solver = SolverKind::feti;
  FetiOptions feti;
  double validation_tolerance = 1e-6;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the OpenMP default

  std::string csv_path;
  std::string svg_path;
  std::string report_path;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
  /// Sorted `key=value` lines covering every key except output paths.
  std::string canonical() const;
  /// FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;
  BddOptions bdd_options() const;
};

/// Parse `key = value` lines; '#' starts a comment. Unknown or duplicated
/// keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Apply a single `key=value` override on top of an existing config.
void apply_override(ExperimentConfig& config, const std::string& assignment);
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// All keys understood by apply_setting.
const std::vector<std::string>& config_keys();

DecomposedProblem build_problem(const ExperimentConfig& config);

}  // namespace fetilab
