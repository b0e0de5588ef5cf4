#pragma once

#include "fetilab/common.hpp"
#include "fetilab/linalg.hpp"
#include "fetilab/problem.hpp"

#include <vector>

namespace fetilab {

/// Factorized per-subdomain data shared by the dual and primal solvers.
struct SubdomainOperators {
  GeneralizedInverse kplus;
  InteriorCondenser condenser;
  Mat schur;      // dense S(s) on the subdomain boundary dofs
  Vec diagonal;   // diag(K(s)) over all local dofs
};

/// One independent task per subdomain.
std::vector<SubdomainOperators> build_subdomain_operators(const DecomposedProblem& problem, Execution exec);

/// diag(K(s)) for every subdomain.
std::vector<Vec> stiffness_diagonals(const DecomposedProblem& problem);

}  // namespace fetilab
