#include "fetilab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fetilab {

void GridSpec::validate() const {
  if (dimension != 2 && dimension != 3) throw ConfigError("dimension must be 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (a >= dimension) {
      if (elements[a] != 1 || subdomains[a] != 1)
        throw ConfigError("unused axis " + std::to_string(a) + " must have 1 element and 1 subdomain");
      continue;
    }
    if (elements[a] <= 0 || subdomains[a] <= 0)
      throw ConfigError("element and subdomain counts must be positive");
    if (elements[a] % subdomains[a] != 0)
      throw ConfigError("elements per axis (" + std::to_string(elements[a]) +
                        ") not divisible by subdomains per axis (" + std::to_string(subdomains[a]) +
                        ") on axis " + std::to_string(a));
    if (!(element_size[a] > 0.0)) throw ConfigError("element size must be positive");
  }
  if (!(slant_degrees > -90.0 && slant_degrees < 90.0))
    throw ConfigError("slant angle must lie in (-90, 90) degrees");
}

GridIndex Mesh::node_grid_index(int node) const {
  const int nx = nodes_per_axis[0];
  const int ny = nodes_per_axis[1];
  return {node % nx, (node / nx) % ny, node / (nx * ny)};
}

GridIndex Mesh::element_grid_index(int element) const {
  const int ex = elements_per_axis[0];
  const int ey = elements_per_axis[1];
  return {element % ex, (element / ex) % ey, element / (ex * ey)};
}

Mesh build_structured_mesh(const GridSpec& spec) {
  spec.validate();
  Mesh mesh;
  mesh.dimension = spec.dimension;
  mesh.elements_per_axis = spec.elements;
  for (int a = 0; a < 3; ++a) mesh.nodes_per_axis[a] = a < spec.dimension ? spec.elements[a] + 1 : 1;

  const double shear = std::tan(spec.slant_degrees * std::numbers::pi / 180.0);
  const int shear_axis = spec.dimension == 3 ? 2 : 1;
  const auto& n = mesh.nodes_per_axis;
  mesh.coordinates.reserve(static_cast<std::size_t>(n[0] * n[1] * n[2]));
  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        Point p{i * spec.element_size[0], j * spec.element_size[1],
                spec.dimension == 3 ? k * spec.element_size[2] : 0.0};
        p[0] += p[shear_axis] * shear;
        mesh.coordinates.push_back(p);
      }

  const auto& e = mesh.elements_per_axis;
  mesh.elements.reserve(static_cast<std::size_t>(e[0] * e[1] * e[2]));
  for (int k = 0; k < e[2]; ++k)
    for (int j = 0; j < e[1]; ++j)
      for (int i = 0; i < e[0]; ++i) {
        if (spec.dimension == 2) {
          mesh.elements.push_back({mesh.node_index(i, j), mesh.node_index(i + 1, j),
                                   mesh.node_index(i + 1, j + 1), mesh.node_index(i, j + 1)});
        } else {
          mesh.elements.push_back({mesh.node_index(i, j, k), mesh.node_index(i + 1, j, k),
                                   mesh.node_index(i + 1, j + 1, k), mesh.node_index(i, j + 1, k),
                                   mesh.node_index(i, j, k + 1), mesh.node_index(i + 1, j, k + 1),
                                   mesh.node_index(i + 1, j + 1, k + 1), mesh.node_index(i, j + 1, k + 1)});
        }
      }
  return mesh;
}

Partition partition_blocks(const Mesh& mesh, const GridSpec& spec) {
  spec.validate();
  if (mesh.elements_per_axis != spec.elements) throw ConfigError("mesh does not match grid spec");

  GridIndex per_block{};
  for (int a = 0; a < 3; ++a) per_block[a] = spec.elements[a] / spec.subdomains[a];
  const auto& sd = spec.subdomains;

  Partition part;
  part.subdomains.resize(static_cast<std::size_t>(sd[0] * sd[1] * sd[2]));
  for (int bz = 0; bz < sd[2]; ++bz)
    for (int by = 0; by < sd[1]; ++by)
      for (int bx = 0; bx < sd[0]; ++bx)
        part.subdomains[static_cast<std::size_t>(bx + sd[0] * (by + sd[1] * bz))].block = {bx, by, bz};

  part.element_owner.resize(static_cast<std::size_t>(mesh.num_elements()));
  for (int el = 0; el < mesh.num_elements(); ++el) {
    const GridIndex g = mesh.element_grid_index(el);
    const int s = g[0] / per_block[0] + sd[0] * (g[1] / per_block[1] + sd[1] * (g[2] / per_block[2]));
    part.element_owner[static_cast<std::size_t>(el)] = s;
    part.subdomains[static_cast<std::size_t>(s)].elements.push_back(el);
  }

  part.multiplicity.assign(static_cast<std::size_t>(mesh.num_nodes()), 0);
  for (auto& sub : part.subdomains) {
    for (int el : sub.elements)
      for (int node : mesh.elements[static_cast<std::size_t>(el)]) sub.nodes.push_back(node);
    std::sort(sub.nodes.begin(), sub.nodes.end());
    sub.nodes.erase(std::unique(sub.nodes.begin(), sub.nodes.end()), sub.nodes.end());
    for (int node : sub.nodes) ++part.multiplicity[static_cast<std::size_t>(node)];
  }
  for (int node = 0; node < mesh.num_nodes(); ++node)
    if (part.multiplicity[static_cast<std::size_t>(node)] >= 2) part.interface_nodes.push_back(node);
  return part;
}

DofLayout DofLayout::make(int num_nodes, int components, const std::vector<char>& constrained) {
  DofLayout layout;
  layout.components = components;
  const std::size_t total = static_cast<std::size_t>(num_nodes * components);
  if (!constrained.empty() && constrained.size() != total)
    throw ConfigError("constraint mask size does not match node dof count");
  layout.global_index.assign(total, -1);
  for (std::size_t d = 0; d < total; ++d)
    if (constrained.empty() || !constrained[d]) layout.global_index[d] = layout.num_free++;
  return layout;
}

int TraceMap::stacked_size() const {
  int total = 0;
  for (const auto& l : local_to_global) total += static_cast<int>(l.size());
  return total;
}

std::vector<int> TraceMap::multiplicity() const {
  std::vector<int> m(static_cast<std::size_t>(global_size), 0);
  for (const auto& l : local_to_global)
    for (int g : l) ++m[static_cast<std::size_t>(g)];
  return m;
}

std::vector<int> TraceMap::offsets() const {
  std::vector<int> off(local_to_global.size() + 1, 0);
  for (std::size_t s = 0; s < local_to_global.size(); ++s)
    off[s + 1] = off[s] + static_cast<int>(local_to_global[s].size());
  return off;
}

SpMat TraceMap::stacked() const {
  const auto off = offsets();
  std::vector<Triplet> trips;
  for (std::size_t s = 0; s < local_to_global.size(); ++s)
    for (std::size_t l = 0; l < local_to_global[s].size(); ++l)
      trips.emplace_back(off[s] + static_cast<int>(l), local_to_global[s][l], 1.0);
  SpMat L(off.back(), global_size);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

std::vector<Vec> TraceMap::restrict_to_subdomains(const Vec& global) const {
  std::vector<Vec> out(local_to_global.size());
  for (std::size_t s = 0; s < local_to_global.size(); ++s) {
    const auto& map = local_to_global[s];
    out[s].resize(static_cast<Eigen::Index>(map.size()));
    for (std::size_t l = 0; l < map.size(); ++l) out[s][static_cast<Eigen::Index>(l)] = global[map[l]];
  }
  return out;
}

Vec TraceMap::assemble(const std::vector<Vec>& local) const {
  Vec g = Vec::Zero(global_size);
  for (std::size_t s = 0; s < local_to_global.size(); ++s) {
    const auto& map = local_to_global[s];
    for (std::size_t l = 0; l < map.size(); ++l) g[map[l]] += local[s][static_cast<Eigen::Index>(l)];
  }
  return g;
}

TraceMap build_trace_maps(const Partition& partition, const DofLayout& layout) {
  TraceMap trace;
  trace.global_size = layout.num_free;
  const auto n = static_cast<std::size_t>(partition.num_subdomains());
  trace.local_to_global.resize(n);
  trace.local_node.resize(n);
  trace.local_component.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (int node : partition.subdomains[s].nodes)
      for (int c = 0; c < layout.components; ++c) {
        const int g = layout.global_index[static_cast<std::size_t>(node * layout.components + c)];
        if (g < 0) continue;
        trace.local_to_global[s].push_back(g);
        trace.local_node[s].push_back(node);
        trace.local_component[s].push_back(c);
      }
  }
  return trace;
}

SpMat JumpMap::block(int s, int local_size) const {
  std::vector<Triplet> trips;
  for (const auto& e : entries[static_cast<std::size_t>(s)]) trips.emplace_back(e.multiplier, e.local_dof, e.sign);
  SpMat B(num_multipliers, local_size);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

SpMat JumpMap::stacked(const TraceMap& trace) const {
  const auto off = trace.offsets();
  std::vector<Triplet> trips;
  for (std::size_t s = 0; s < entries.size(); ++s)
    for (const auto& e : entries[s]) trips.emplace_back(e.multiplier, off[s] + e.local_dof, e.sign);
  SpMat B(num_multipliers, off.back());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

void JumpMap::add_transpose(int s, const Vec& lambda, Vec& local, double scale) const {
  for (const auto& e : entries[static_cast<std::size_t>(s)]) local[e.local_dof] += scale * e.sign * lambda[e.multiplier];
}

void JumpMap::add_apply(int s, const Vec& local, Vec& lambda) const {
  for (const auto& e : entries[static_cast<std::size_t>(s)]) lambda[e.multiplier] += e.sign * local[e.local_dof];
}

std::vector<int> JumpMap::boundary_dofs(int s) const {
  std::vector<int> dofs;
  for (const auto& e : entries[static_cast<std::size_t>(s)]) dofs.push_back(e.local_dof);
  std::sort(dofs.begin(), dofs.end());
  dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  return dofs;
}

JumpMap build_jump_operator(const TraceMap& trace, RedundancyMode mode) {
  struct Owner {
    int subdomain;
    int local_dof;
  };
  std::vector<std::vector<Owner>> owners(static_cast<std::size_t>(trace.global_size));
  for (int s = 0; s < trace.num_subdomains(); ++s) {
    const auto& map = trace.local_to_global[static_cast<std::size_t>(s)];
    for (std::size_t l = 0; l < map.size(); ++l)
      owners[static_cast<std::size_t>(map[l])].push_back({s, static_cast<int>(l)});
  }

  JumpMap jump;
  jump.mode = mode;
  jump.entries.resize(static_cast<std::size_t>(trace.num_subdomains()));
  auto couple = [&](int g, const Owner& lo, const Owner& hi) {
    const int m = jump.num_multipliers++;
    jump.multiplier_global_dof.push_back(g);
    jump.entries[static_cast<std::size_t>(lo.subdomain)].push_back({m, lo.local_dof, +1});
    jump.entries[static_cast<std::size_t>(hi.subdomain)].push_back({m, hi.local_dof, -1});
  };
  for (int g = 0; g < trace.global_size; ++g) {
    const auto& own = owners[static_cast<std::size_t>(g)];  // already in ascending subdomain order
    if (own.size() < 2) continue;
    if (mode == RedundancyMode::non_redundant) {
      for (std::size_t k = 1; k < own.size(); ++k) couple(g, own[0], own[k]);
    } else {
      for (std::size_t a = 0; a < own.size(); ++a)
        for (std::size_t b = a + 1; b < own.size(); ++b) couple(g, own[a], own[b]);
    }
  }
  return jump;
}

}  // namespace fetilab
