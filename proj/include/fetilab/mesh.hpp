#pragma once

#include "fetilab/common.hpp"

#include <array>
#include <vector>

namespace fetilab {

using Point = std::array<double, 3>;
using GridIndex = std::array<int, 3>;

/// Structured tensor-grid description. Unused axes (the z axis in 2D) are 1.
struct GridSpec {
  int dimension = 2;
  GridIndex elements{1, 1, 1};
  GridIndex subdomains{1, 1, 1};
  Point element_size{1.0, 1.0, 1.0};
  double slant_degrees = 0.0;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Q1 mesh: 4-node quads (2D) or 8-node hexes (3D). Nodes are numbered
/// lexicographically with the x index fastest.
struct Mesh {
  int dimension = 2;
  GridIndex elements_per_axis{1, 1, 1};
  GridIndex nodes_per_axis{2, 2, 1};
  std::vector<Point> coordinates;
  std::vector<std::vector<int>> elements;

  int num_nodes() const { return static_cast<int>(coordinates.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int nodes_per_element() const { return dimension == 2 ? 4 : 8; }
  int node_index(int i, int j, int k = 0) const {
    return i + nodes_per_axis[0] * (j + nodes_per_axis[1] * k);
  }
  GridIndex node_grid_index(int node) const;
  GridIndex element_grid_index(int element) const;
};

Mesh build_structured_mesh(const GridSpec& spec);

struct SubdomainPart {
  GridIndex block{0, 0, 0};
  std::vector<int> elements;
  std::vector<int> nodes;  // sorted global node ids
};

struct Partition {
  std::vector<SubdomainPart> subdomains;
  std::vector<int> multiplicity;     // per mesh node
  std::vector<int> interface_nodes;  // sorted, multiplicity >= 2
  std::vector<int> element_owner;

  int num_subdomains() const { return static_cast<int>(subdomains.size()); }
};

/// Regular block partition in index space; subdomain s has block index
/// (bx, by, bz) with s = bx + sx * (by + sy * bz).
Partition partition_blocks(const Mesh& mesh, const GridSpec& spec);

/// Per-node dof layout after Dirichlet elimination.
struct DofLayout {
  int components = 1;
  std::vector<int> global_index;  // node * components + c -> free dof or -1
  int num_free = 0;

  static DofLayout make(int num_nodes, int components, const std::vector<char>& constrained);
  bool is_constrained(int node, int component) const {
    return global_index[static_cast<std::size_t>(node * components + component)] < 0;
  }
};

/// Boolean selection L(s) from global free dofs to each subdomain's dofs.
struct TraceMap {
  int global_size = 0;
  std::vector<std::vector<int>> local_to_global;
  std::vector<std::vector<int>> local_node;       // owning mesh node per local dof
  std::vector<std::vector<int>> local_component;  // field component per local dof

  int num_subdomains() const { return static_cast<int>(local_to_global.size()); }
  int local_size(int s) const { return static_cast<int>(local_to_global[static_cast<std::size_t>(s)].size()); }
  int stacked_size() const;
  std::vector<int> multiplicity() const;
  std::vector<int> offsets() const;  // stacked offset of each subdomain
  /// Stacked L, (sum of local sizes) x global_size.
  SpMat stacked() const;
  /// u(s) = L(s) u_g for every subdomain.
  std::vector<Vec> restrict_to_subdomains(const Vec& global) const;
  /// sum_s L(s)^T v(s).
  Vec assemble(const std::vector<Vec>& local) const;
};

/// Local dofs are ordered by subdomain node id, then component; constrained
/// dofs are skipped.
TraceMap build_trace_maps(const Partition& partition, const DofLayout& layout);

enum class RedundancyMode { non_redundant, fully_redundant };

struct JumpEntry {
  int multiplier = 0;
  int local_dof = 0;
  int sign = 0;
};

/// Signed Boolean B(s). Each multiplier couples one pair of matching dofs,
/// +1 on the lower subdomain index and -1 on the higher one.
struct JumpMap {
  RedundancyMode mode = RedundancyMode::non_redundant;
  int num_multipliers = 0;
  std::vector<std::vector<JumpEntry>> entries;  // per subdomain
  std::vector<int> multiplier_global_dof;

  int num_subdomains() const { return static_cast<int>(entries.size()); }
  SpMat block(int s, int local_size) const;
  SpMat stacked(const TraceMap& trace) const;
  /// local += scale * B(s)^T lambda
  void add_transpose(int s, const Vec& lambda, Vec& local, double scale = 1.0) const;
  /// lambda += B(s) local
  void add_apply(int s, const Vec& local, Vec& lambda) const;
  /// Sorted local dofs of subdomain s touched by a multiplier.
  std::vector<int> boundary_dofs(int s) const;
};

/// Non-redundant mode uses a star spanning tree rooted at the lowest owning
/// subdomain of each dof; fully-redundant mode couples every owner pair.
JumpMap build_jump_operator(const TraceMap& trace, RedundancyMode mode);

}  // namespace fetilab
