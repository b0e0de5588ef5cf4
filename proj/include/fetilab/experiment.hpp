#pragma once

#include "fetilab/config.hpp"
#include "fetilab/pcg.hpp"

#include <string>

namespace fetilab {

struct ExperimentResult {
  ExperimentConfig config;
  Vec u_global;
  Vec oracle;
  ResidualHistory history;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
  bool converged = false;
  /// converged and the oracle error is within config.validation_tolerance
  bool validated = false;
  double oracle_error = 0.0;
  double max_admissibility_defect = 0.0;  // FETI only
  double max_balance_defect = 0.0;        // BDD only
  double seconds = 0.0;
};

/// Build the problem, run the configured solver and compare with the
/// direct oracle. Non-convergence is reported through the result, never
/// thrown; invalid configs raise ConfigError.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// 0 converged and validated, 2 otherwise.
int exit_status(const ExperimentResult& result);

}  // namespace fetilab
