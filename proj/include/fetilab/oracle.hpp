#pragma once

#include "fetilab/common.hpp"
#include "fetilab/problem.hpp"

namespace fetilab {

struct OracleSolution {
  Vec u_global;
  double residual = 0.0;  // ||K_g u_g - f_g|| / ||f_g||
};

/// Sparse direct solve of the directly assembled global system.
/// Throws NumericalError when the global matrix is singular.
OracleSolution direct_oracle(const DecomposedProblem& problem);

/// ||u - reference|| / ||reference|| (absolute when the reference is zero).
double relative_error(const Vec& u, const Vec& reference);

}  // namespace fetilab
