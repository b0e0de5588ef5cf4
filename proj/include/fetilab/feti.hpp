#pragma once

#include "fetilab/common.hpp"
#include "fetilab/local_operators.hpp"
#include "fetilab/pcg.hpp"
#include "fetilab/problem.hpp"
#include "fetilab/splitting.hpp"

#include <string>
#include <vector>

namespace fetilab {

enum class ProjectorKind { identity, superlumped, dirichlet };
enum class PreconditionerKind { lumped, dirichlet };
enum class ScalingKind { multiplicity, stiffness };
enum class InitKind { standard, new_estimate };
enum class StoppingKind { global_residual, interface_residual };

std::string to_string(ProjectorKind kind);
std::string to_string(PreconditionerKind kind);
std::string to_string(ScalingKind kind);
std::string to_string(InitKind kind);
std::string to_string(StoppingKind kind);

/// Dual interface problem  [F G; G^T 0] [lambda; alpha] = [d; e]  with
/// F = B K^+ B^T, d = B K^+ f, G = B R, e = R^T f. K^+ is the Moore-Penrose
/// form of each subdomain's generalized inverse. F is never assembled
/// except by assemble_dense_F().
///
/// Holds references to `problem` and `ops`; both must outlive it.
class DualInterfaceSystem {
 public:
  DualInterfaceSystem(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                      const SplitForces& forces, Execution exec);

  Vec apply_F(const Vec& lambda) const;
  const Vec& d() const { return d_; }
  const Mat& G() const { return G_; }
  const Vec& e() const { return e_; }
  int num_multipliers() const { return static_cast<int>(d_.size()); }
  int num_modes() const { return static_cast<int>(G_.cols()); }
  const std::vector<int>& mode_offsets() const { return mode_offsets_; }
  const SplitForces& forces() const { return forces_; }

  /// u(s) = K(s)^+ (f(s) - B(s)^T lambda) - R(s) alpha(s).
  std::vector<Vec> recover(const Vec& lambda, const Vec& alpha) const;

  /// Column-by-column assembly; refuses more than 2000 multipliers.
  Mat assemble_dense_F() const;

 private:
  const DecomposedProblem& problem_;
  const std::vector<SubdomainOperators>& ops_;
  SplitForces forces_;
  Execution exec_;
  Vec d_, e_;
  Mat G_;
  std::vector<int> mode_offsets_;
};

/// Scaling weights A per subdomain: ones (multiplicity) or diag(K)^-1 (stiffness).
std::vector<Vec> scaling_weights(const DecomposedProblem& problem, ScalingKind scaling);

/// z = B~ S B~^T r (dirichlet) or z = B~ K_bb B~^T r (lumped), with
/// B~ = (B A B^T)^+ B A.
class Preconditioner {
 public:
  Preconditioner(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                 PreconditionerKind kind, ScalingKind scaling, Execution exec);

  Vec apply(const Vec& r) const;
  const ScaledJump& scaled_jump() const { return scaled_; }
  PreconditionerKind kind() const { return kind_; }

 private:
  const DecomposedProblem& problem_;
  const std::vector<SubdomainOperators>& ops_;
  PreconditionerKind kind_;
  Execution exec_;
  ScaledJump scaled_;
  std::vector<Mat> lumped_blocks_;
};

/// Q for the coarse projector: identity, superlumped
/// (B diag(K_bb)^-1 B^T)^+, or the Dirichlet preconditioner with `scaling`.
/// The returned map owns its data.
LinearMap make_Q(ProjectorKind kind, const DecomposedProblem& problem,
                 const std::vector<SubdomainOperators>& ops, ScalingKind scaling, Execution exec);

/// P(Q) = I - Q G (G^T Q G)^-1 G^T with (G^T Q G) factorized once.
/// Throws NumericalError when G^T Q G is singular.
class Projector {
 public:
  Projector(Mat G, const LinearMap& Q);

  Vec project(const Vec& x) const;
  Vec project_transpose(const Vec& x) const;
  /// Q G (G^T Q G)^-1 e
  Vec coarse_lift(const Vec& e) const;
  /// (G^T Q G)^-1 G^T Q r, the Q-weighted least-squares rigid amplitudes.
  Vec coarse_amplitudes(const Vec& r) const;
  const Mat& G() const { return G_; }
  bool trivial() const { return G_.cols() == 0; }

 private:
  Mat G_, QG_;
  // G^T Q G and its transpose are factorized as computed, without
  // symmetrization, so that G^T P(Q) x vanishes to rounding.
  Eigen::PartialPivLU<Mat> coarse_, coarse_t_;
};

/// lambda00 = (B D B^T)^+ B D f*_b with D = diag(K_bb)^-1; `condensed` holds
/// f*_b per subdomain on its boundary dofs.
Vec compute_lambda00(const DecomposedProblem& problem, const std::vector<Vec>& condensed);

/// lambda0 = P(Q) lambda00 + Q G (G^T Q G)^-1 e.
Vec compute_lambda0(const Vec& lambda00, const Projector& projector, const Vec& e);

struct FetiOptions {
  ProjectorKind projector = ProjectorKind::dirichlet;
  PreconditionerKind preconditioner = PreconditionerKind::dirichlet;
  ScalingKind scaling = ScalingKind::stiffness;
  InitKind init = InitKind::new_estimate;
  SplitKind splitting = SplitKind::raw;
  StoppingKind stopping = StoppingKind::global_residual;
  double epsilon = 1e-6;
  int max_iterations = 500;
  Execution execution = Execution::parallel;
  bool keep_directions = false;
};

struct FetiResult {
  Vec lambda;
  Vec alpha;
  Vec lambda00;
  Vec lambda0;
  std::vector<Vec> u;
  Vec u_global;
  ResidualHistory history;
  KrylovReport krylov;
  bool converged = false;
  /// max over iterates of ||G^T lambda_k - e|| / ||e|| (absolute when e = 0).
  double max_admissibility_defect = 0.0;
};

FetiResult solve_feti(const DecomposedProblem& problem, const FetiOptions& options);
FetiResult solve_feti(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                      const FetiOptions& options);

struct ExactnessReport {
  double compatibility_residual = 0.0;  // ||F lambda0 + G alpha - d|| / ||d||
  int cg_iterations = -1;               // iterations a PCG started at lambda0 needs
  Vec lambda0;
  Vec alpha;
};

/// With D = S^+ and Q = F^+ from dense F: lambda00 = F^+ d,
/// lambda0 = P(F^+) lambda00 + F^+ G (G^T F^+ G)^-1 e,
/// alpha = (G^T F^+ G)^-1 (G^T F^+ d - e).
ExactnessReport exactness_check_DSplus(const DecomposedProblem& problem,
                                       const std::vector<SubdomainOperators>& ops,
                                       SplitKind splitting = SplitKind::raw);

}  // namespace fetilab
