#include "fetilab/oracle.hpp"

#include "fetilab/linalg.hpp"

namespace fetilab {

OracleSolution direct_oracle(const DecomposedProblem& problem) {
  Factorization factor;
  try {
    factor = Factorization(problem.global_stiffness);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("singular global matrix, insufficient Dirichlet constraints: ") + e.what());
  }
  OracleSolution out;
  out.u_global = factor.solve(problem.global_force);
  out.residual = relative_global_residual(problem, out.u_global);
  return out;
}

double relative_error(const Vec& u, const Vec& reference) {
  const double rn = reference.norm();
  const double d = (u - reference).norm();
  return rn > 0.0 ? d / rn : d;
}

}  // namespace fetilab
