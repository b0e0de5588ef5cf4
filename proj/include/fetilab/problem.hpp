#pragma once

#include "fetilab/assembly.hpp"
#include "fetilab/common.hpp"
#include "fetilab/mesh.hpp"

#include <vector>

namespace fetilab {

/// How applied nodal loads on interface nodes are handed to subdomains before
/// any splitting: all of it to the lowest owning subdomain, or equal shares.
enum class RawAssignment { owner, multiplicity };

struct ProblemSpec {
  GridSpec grid;
  Physics physics = Physics::scalar;
  MaterialField material;
  LoadSpec load;
  int clamp_axis = 0;  // every dof on the face at the minimum of this axis is fixed
  RedundancyMode redundancy = RedundancyMode::non_redundant;
  RawAssignment raw_assignment = RawAssignment::owner;
  Execution execution = Execution::parallel;
};

/// Everything the interface solvers and the oracle need: per-subdomain
/// systems, L and B maps, and the directly assembled global system.
struct DecomposedProblem {
  Physics physics = Physics::scalar;
  int dimension = 1;
  int components = 1;
  TraceMap trace;
  JumpMap jump;
  std::vector<SubdomainSystem> subdomains;
  SpMat global_stiffness;  // direct assembly over all elements, free dofs only
  Vec global_force;        // assembled applied loads, free dofs only

  int num_subdomains() const { return static_cast<int>(subdomains.size()); }
  int num_multipliers() const { return jump.num_multipliers; }
  std::vector<Vec> raw_forces() const;
};

/// Mesh, partition, element assembly, Dirichlet elimination, load
/// assignment and rigid-mode detection for a structured grid problem.
DecomposedProblem build_problem(const ProblemSpec& spec);

/// Assemble K(s) for one subdomain from its element list; rows and columns
/// of constrained dofs are deleted.
SpMat assemble_subdomain_stiffness(const Mesh& mesh, const Partition& partition, const TraceMap& trace,
                                   const DofLayout& layout, int s, Physics physics,
                                   const MaterialField& material);

/// Two springs in series on nodes 0-1-2; node 0 clamped; subdomain 1 holds
/// spring 0-1 (stiffness k1), subdomain 2 holds spring 1-2 (stiffness k2).
/// `end_load` acts on node 2, `interface_load` on node 1 (assigned to the
/// lowest owner).
DecomposedProblem make_spring2(double k1 = 1.0, double k2 = 1.0, double end_load = 1.0,
                               double interface_load = 0.0,
                               RedundancyMode mode = RedundancyMode::non_redundant);

/// Node partition of the spring2 fixture, before any Dirichlet elimination.
Partition spring2_partition();

/// ||K_g u_g - f_g|| / ||f_g|| with the directly assembled global system.
double relative_global_residual(const DecomposedProblem& problem, const Vec& u_global);

/// u_g = (sum_s L(s)^T W(s) u(s)) / (sum_s L(s)^T W(s) 1): weighted average
/// of possibly incompatible subdomain fields. Empty weights mean W = I.
Vec weighted_average(const TraceMap& trace, const std::vector<Vec>& local, const std::vector<Vec>& weights = {});

/// Fill boundary/internal sets of each subdomain from the jump map.
void classify_boundary(DecomposedProblem& problem);

}  // namespace fetilab
