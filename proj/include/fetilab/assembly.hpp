#pragma once

#include "fetilab/common.hpp"
#include "fetilab/mesh.hpp"

#include <span>
#include <vector>

namespace fetilab {

enum class Physics { scalar, elasticity };

/// Field components per node: 1 for scalar diffusion, `dimension` for elasticity.
inline int components_for(Physics physics, int dimension) {
  return physics == Physics::scalar ? 1 : dimension;
}

enum class MaterialPattern { uniform, checkerboard, layers };

/// Two-material coefficient field defined per subdomain block. For scalar
/// physics (e1, e2) are conductivities and nu is ignored.
struct MaterialField {
  MaterialPattern pattern = MaterialPattern::uniform;
  double e1 = 1.0;
  double e2 = 1.0;
  double nu = 0.3;
  int layer_axis = 1;

  void validate() const;
  /// uniform -> e1; checkerboard -> e1 on even block index sums; layers -> by
  /// parity of the block index along layer_axis.
  double modulus(const GridIndex& block) const;
};

/// Q1 element matrix with 2x2 (2D) or 2x2x2 (3D) Gauss quadrature. Dofs are
/// node-major, component-minor. 2D elasticity is plane strain.
/// Throws NumericalError when the Jacobian is not positive at a Gauss point.
Mat element_stiffness(Physics physics, int dimension, std::span<const Point> coords,
                      double modulus, double nu);

enum class LoadKind { none, face, body };

/// face: uniform pressure (elasticity) or inflow flux (scalar) of the given
/// magnitude on the face at the maximum of `axis`, integrated with the face
/// shape functions. body: uniform source acting along -axis for elasticity.
struct LoadSpec {
  LoadKind kind = LoadKind::face;
  double magnitude = 1.0;
  int axis = 0;
};

/// Consistent nodal load vector over all node dofs (node * components + c).
Vec nodal_loads(const Mesh& mesh, Physics physics, const LoadSpec& load);

struct SubdomainSystem {
  SpMat K;
  Vec f;
  std::vector<int> boundary;  // local dofs carrying multipliers, ascending
  std::vector<int> internal;  // remaining local dofs, ascending
  Mat R;                      // orthonormal rigid-body modes, possibly 0 columns
  std::vector<int> constrained_node_dofs;  // eliminated Dirichlet dofs (node * components + c)

  int size() const { return static_cast<int>(K.rows()); }
  int num_modes() const { return static_cast<int>(R.cols()); }
  bool floating() const { return R.cols() > 0; }
};

/// Candidate geometric modes (constants, or translations plus rotations about
/// `center`) for the given dof coordinates and components.
Mat geometric_modes(Physics physics, int dimension, std::span<const Point> dof_coords,
                    std::span<const int> dof_component, const Point& center);

/// Keeps the subspace of the candidate modes annihilated by K,
/// i.e. ||K r|| <= 1e-8 ||K|| ||r||, and returns an orthonormal basis of it.
Mat rigid_body_modes(const SpMat& K, const Mat& candidates);

}  // namespace fetilab
