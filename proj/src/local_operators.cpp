#include "fetilab/local_operators.hpp"

namespace fetilab {

std::vector<Vec> stiffness_diagonals(const DecomposedProblem& problem) {
  std::vector<Vec> d;
  d.reserve(problem.subdomains.size());
  for (const auto& sub : problem.subdomains) d.push_back(sub.K.diagonal());
  return d;
}

std::vector<SubdomainOperators> build_subdomain_operators(const DecomposedProblem& problem, Execution exec) {
  std::vector<SubdomainOperators> ops(problem.subdomains.size());
  for_each_subdomain(exec, ops.size(), [&](std::size_t s) {
    const auto& sub = problem.subdomains[s];
    auto& op = ops[s];
    op.kplus = GeneralizedInverse(sub.K, sub.R);
    op.condenser = InteriorCondenser(sub.K, sub.boundary, sub.internal);
    op.schur = op.condenser.schur();
    op.diagonal = sub.K.diagonal();
  });
  return ops;
}

}  // namespace fetilab
