#include "fetilab/experiment.hpp"

#include "fetilab/oracle.hpp"

#include <chrono>

namespace fetilab {

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.config = config;

  const DecomposedProblem problem = build_problem(config);
  const auto ops = build_subdomain_operators(problem, config.feti.execution);
  if (config.solver == SolverKind::feti) {
    FetiResult r = solve_feti(problem, ops, config.feti);
    out.u_global = std::move(r.u_global);
    out.history = std::move(r.history);
    out.iterations = r.krylov.iterations;
    out.termination = r.krylov.termination;
    out.converged = r.converged;
    out.max_admissibility_defect = r.max_admissibility_defect;
  } else {
    BddResult r = solve_bdd(problem, ops, config.bdd_options());
    out.u_global = std::move(r.u_global);
    out.history = std::move(r.history);
    out.iterations = r.krylov.iterations;
    out.termination = r.krylov.termination;
    out.converged = r.converged;
    out.max_balance_defect = r.max_balance_defect;
  }

  out.oracle = direct_oracle(problem).u_global;
  out.oracle_error = relative_error(out.u_global, out.oracle);
  out.validated = out.converged && out.oracle_error <= config.validation_tolerance;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

int exit_status(const ExperimentResult& result) { return result.validated ? 0 : 2; }

}  // namespace fetilab
