#pragma once

#include "fetilab/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fetilab {

using LinearMap = std::function<Vec(const Vec&)>;

enum class Termination { converged, max_iterations, breakdown, stagnation };

std::string to_string(Termination t);

/// Operators of a projected preconditioned CG. Empty maps act as identity.
/// The preconditioned direction is project(precondition(project_transpose(r))).
/// constrain is applied to each search direction after orthogonalization; it
/// must map onto range(project), e.g. a cheap orthogonal projector.
struct PcgOperators {
  LinearMap apply;
  LinearMap precondition;
  LinearMap project;
  LinearMap project_transpose;
  LinearMap constrain;
};

/// Everything a convergence functional may look at for iterate k.
struct PcgState {
  int iteration = 0;
  const Vec& x;
  const Vec& residual;            // rhs - A x
  const Vec& projected_residual;  // project_transpose(residual)
};

/// Returns the value compared with the tolerance. The default functional is
/// ||projected residual|| / ||initial projected residual||.
using ConvergenceFunctional = std::function<double(const PcgState&)>;

/// Observer called once per iterate (after the functional).
using IterateObserver = std::function<void(const PcgState&, double functional)>;

struct PcgSettings {
  double tolerance = 1e-6;
  int max_iterations = 500;
  bool reorthogonalize = true;
  bool keep_directions = false;  // needed for conjugacy_defect()
  int stagnation_window = 25;     // stop after this many iterates without a new best functional; 0 disables
};

struct KrylovReport {
  int iterations = 0;
  int directions = 0;
  Termination termination = Termination::max_iterations;
  bool negative_curvature = false;
  std::vector<double> functional;          // per iterate, including iterate 0
  std::vector<double> residual_norms;      // ||projected residual|| per iterate
  std::vector<double> preconditioned_norms;  // sqrt(w^T z) per iterate where computed
  std::vector<Vec> search_directions;      // filled when keep_directions
  std::vector<Vec> operator_directions;    // A p, filled when keep_directions

  /// max |p_i^T A p_j| / (||p_i||_A ||p_j||_A), i != j.
  double conjugacy_defect() const;
};

struct PcgResult {
  Vec x;
  KrylovReport report;
};

/// Projected preconditioned conjugate gradient with optional full
/// reorthogonalization of each new direction (modified Gram-Schmidt in the A
/// inner product against all stored directions). Stops when the functional
/// is <= tolerance, when the projected residual vanishes, after
/// max_iterations, on a non-finite scalar ("breakdown"), or when the
/// functional has not improved for stagnation_window iterates. Negative
/// curvature is flagged and iteration continues. Without convergence the
/// returned x is the iterate with the smallest functional.
PcgResult pcg(const PcgOperators& ops, const Vec& rhs, const Vec& x0, const PcgSettings& settings,
              const ConvergenceFunctional& functional = {}, const IterateObserver& observer = {});

}  // namespace fetilab
