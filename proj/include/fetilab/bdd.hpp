#pragma once

#include "fetilab/common.hpp"
#include "fetilab/linalg.hpp"
#include "fetilab/local_operators.hpp"
#include "fetilab/pcg.hpp"
#include "fetilab/problem.hpp"

#include <vector>

namespace fetilab {

/// Assembled Schur system on the interface dofs:
/// S = sum_s L_b(s)^T S(s) L_b(s), b = sum_s L_b(s)^T f*_b(s).
/// Holds references to `problem` and `ops`.
class PrimalInterfaceSystem {
 public:
  PrimalInterfaceSystem(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                        Execution exec);

  Vec apply_S(const Vec& x) const;
  const Vec& rhs() const { return rhs_; }
  int size() const { return static_cast<int>(rhs_.size()); }

  /// Interface index of each boundary dof of subdomain s, in boundary order.
  const std::vector<int>& boundary_map(int s) const { return maps_[static_cast<std::size_t>(s)]; }
  /// D(s) = diag(K_bb(s)) / assembled diagonal, on the boundary dofs of s.
  const Vec& weights(int s) const { return weights_[static_cast<std::size_t>(s)]; }
  /// Global free-dof index of each interface dof.
  const std::vector<int>& interface_dofs() const { return interface_dofs_; }

  Vec restrict(int s, const Vec& x) const;
  void add_extend(int s, const Vec& local, Vec& x) const;

  /// max |sum_s L_b^T D(s) L_b 1 - 1|.
  double partition_of_unity_defect() const;

  /// Subdomain displacements from interface values by interior back-substitution.
  std::vector<Vec> recover(const Vec& x) const;

  Mat assemble_dense_S() const;

 private:
  const DecomposedProblem& problem_;
  const std::vector<SubdomainOperators>& ops_;
  Execution exec_;
  std::vector<int> interface_dofs_;
  std::vector<std::vector<int>> maps_;
  std::vector<Vec> weights_;
  Vec rhs_;
};

/// Coarse space Z of weighted rigid-mode boundary traces with E = Z^T S Z.
/// P_c = I - Z E^-1 Z^T S; balanced start x0 = Z E^-1 Z^T b.
class CoarseBalancer {
 public:
  CoarseBalancer(const PrimalInterfaceSystem& system, const DecomposedProblem& problem);

  Vec start(const Vec& b) const;
  Vec project(const Vec& x) const;            // P_c x
  Vec project_transpose(const Vec& r) const;  // P_c^T r
  /// ||Z^T r|| / (||Z|| ||r_ref||)
  double balance_defect(const Vec& r, double reference_norm) const;

  const Mat& basis() const { return Z_; }
  bool trivial() const { return Z_.cols() == 0; }

 private:
  Mat Z_, SZ_;
  Eigen::LLT<Mat> coarse_;
};

/// Weighted Neumann-Neumann z = sum_s L_b^T D(s) S(s)^+ D(s) L_b r.
class NeumannNeumann {
 public:
  NeumannNeumann(const PrimalInterfaceSystem& system, const DecomposedProblem& problem,
                 const std::vector<SubdomainOperators>& ops, Execution exec);

  Vec apply(const Vec& r) const;

 private:
  const PrimalInterfaceSystem& system_;
  Execution exec_;
  std::vector<GeneralizedInverse> local_;
};

struct BddOptions {
  double epsilon = 1e-6;
  int max_iterations = 500;
  bool stop_on_global_residual = true;
  Execution execution = Execution::parallel;
  bool keep_directions = false;
};

struct BddResult {
  Vec interface_solution;
  std::vector<Vec> u;
  Vec u_global;
  ResidualHistory history;
  KrylovReport krylov;
  bool converged = false;
  /// max over iterates of the balance defect of the residual.
  double max_balance_defect = 0.0;
};

BddResult solve_bdd(const DecomposedProblem& problem, const BddOptions& options);
BddResult solve_bdd(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                    const BddOptions& options);

}  // namespace fetilab
