#include "fetilab/problem.hpp"

#include <algorithm>
#include <iostream>

namespace fetilab {

std::vector<Vec> DecomposedProblem::raw_forces() const {
  std::vector<Vec> f;
  f.reserve(subdomains.size());
  for (const auto& sub : subdomains) f.push_back(sub.f);
  return f;
}

double relative_global_residual(const DecomposedProblem& problem, const Vec& u_global) {
  const double fn = problem.global_force.norm();
  const Vec r = problem.global_stiffness * u_global - problem.global_force;
  return fn > 0.0 ? r.norm() / fn : r.norm();
}

Vec weighted_average(const TraceMap& trace, const std::vector<Vec>& local, const std::vector<Vec>& weights) {
  if (weights.empty()) {
    std::vector<Vec> ones;
    for (const auto& v : local) ones.push_back(Vec::Ones(v.size()));
    return trace.assemble(local).cwiseQuotient(trace.assemble(ones));
  }
  std::vector<Vec> weighted;
  for (std::size_t s = 0; s < local.size(); ++s) weighted.push_back(weights[s].cwiseProduct(local[s]));
  return trace.assemble(weighted).cwiseQuotient(trace.assemble(weights));
}

void classify_boundary(DecomposedProblem& problem) {
  for (int s = 0; s < problem.num_subdomains(); ++s) {
    auto& sub = problem.subdomains[static_cast<std::size_t>(s)];
    sub.boundary = problem.jump.boundary_dofs(s);
    sub.internal.clear();
    std::size_t b = 0;
    for (int l = 0; l < sub.size(); ++l) {
      if (b < sub.boundary.size() && sub.boundary[b] == l) {
        ++b;
        continue;
      }
      sub.internal.push_back(l);
    }
  }
}

SpMat assemble_subdomain_stiffness(const Mesh& mesh, const Partition& partition, const TraceMap& trace,
                                   const DofLayout& layout, int s, Physics physics,
                                   const MaterialField& material) {
  const auto& part = partition.subdomains[static_cast<std::size_t>(s)];
  const auto& l2g = trace.local_to_global[static_cast<std::size_t>(s)];
  std::vector<int> g2l(static_cast<std::size_t>(trace.global_size), -1);
  for (std::size_t l = 0; l < l2g.size(); ++l) g2l[static_cast<std::size_t>(l2g[l])] = static_cast<int>(l);

  const int nc = layout.components;
  const double modulus = material.modulus(part.block);
  std::vector<Triplet> trips;
  for (int el : part.elements) {
    const auto& conn = mesh.elements[static_cast<std::size_t>(el)];
    std::vector<Point> xs;
    for (int n : conn) xs.push_back(mesh.coordinates[static_cast<std::size_t>(n)]);
    const Mat Ke = element_stiffness(physics, mesh.dimension, xs, modulus, material.nu);
    std::vector<int> loc(conn.size() * static_cast<std::size_t>(nc), -1);
    for (std::size_t a = 0; a < conn.size(); ++a)
      for (int c = 0; c < nc; ++c) {
        const int g = layout.global_index[static_cast<std::size_t>(conn[a] * nc + c)];
        loc[a * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] = g < 0 ? -1 : g2l[static_cast<std::size_t>(g)];
      }
    for (std::size_t i = 0; i < loc.size(); ++i) {
      if (loc[i] < 0) continue;
      for (std::size_t j = 0; j < loc.size(); ++j)
        if (loc[j] >= 0) trips.emplace_back(loc[i], loc[j], Ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  SpMat K(static_cast<Eigen::Index>(l2g.size()), static_cast<Eigen::Index>(l2g.size()));
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

DecomposedProblem build_problem(const ProblemSpec& spec) {
  spec.grid.validate();
  spec.material.validate();
  if (spec.clamp_axis < 0 || spec.clamp_axis >= spec.grid.dimension) throw ConfigError("clamp axis out of range");

  const Mesh mesh = build_structured_mesh(spec.grid);
  const Partition partition = partition_blocks(mesh, spec.grid);
  const int nc = components_for(spec.physics, spec.grid.dimension);

  std::vector<char> constrained(static_cast<std::size_t>(mesh.num_nodes() * nc), 0);
  for (int node = 0; node < mesh.num_nodes(); ++node)
    if (mesh.node_grid_index(node)[static_cast<std::size_t>(spec.clamp_axis)] == 0)
      for (int c = 0; c < nc; ++c) constrained[static_cast<std::size_t>(node * nc + c)] = 1;
  const DofLayout layout = DofLayout::make(mesh.num_nodes(), nc, constrained);

  DecomposedProblem problem;
  problem.physics = spec.physics;
  problem.dimension = spec.grid.dimension;
  problem.components = nc;
  problem.trace = build_trace_maps(partition, layout);
  problem.jump = build_jump_operator(problem.trace, spec.redundancy);

  const Vec nodal = nodal_loads(mesh, spec.physics, spec.load);
  problem.global_force = Vec::Zero(layout.num_free);
  bool dropped = false;
  for (std::size_t d = 0; d < layout.global_index.size(); ++d) {
    const int g = layout.global_index[d];
    if (g >= 0) problem.global_force[g] = nodal[static_cast<Eigen::Index>(d)];
    else if (nodal[static_cast<Eigen::Index>(d)] != 0.0) dropped = true;
  }
  if (dropped) std::cerr << "warning: load on Dirichlet dofs dropped\n";

  const std::vector<int> mult = problem.trace.multiplicity();
  std::vector<int> lowest_owner(static_cast<std::size_t>(layout.num_free), -1);
  for (int s = problem.trace.num_subdomains() - 1; s >= 0; --s)
    for (int g : problem.trace.local_to_global[static_cast<std::size_t>(s)]) lowest_owner[static_cast<std::size_t>(g)] = s;

  problem.subdomains.resize(static_cast<std::size_t>(partition.num_subdomains()));
  for_each_subdomain(spec.execution, problem.subdomains.size(), [&](std::size_t s) {
    auto& sub = problem.subdomains[s];
    const int si = static_cast<int>(s);
    sub.K = assemble_subdomain_stiffness(mesh, partition, problem.trace, layout, si, spec.physics, spec.material);
    const auto& l2g = problem.trace.local_to_global[s];
    sub.f = Vec::Zero(static_cast<Eigen::Index>(l2g.size()));
    for (std::size_t l = 0; l < l2g.size(); ++l) {
      const auto g = static_cast<std::size_t>(l2g[l]);
      const double load = problem.global_force[l2g[l]];
      if (spec.raw_assignment == RawAssignment::owner) {
        if (lowest_owner[g] == si) sub.f[static_cast<Eigen::Index>(l)] = load;
      } else {
        sub.f[static_cast<Eigen::Index>(l)] = load / mult[g];
      }
    }
    for (int node : partition.subdomains[s].nodes)
      for (int c = 0; c < nc; ++c)
        if (layout.is_constrained(node, c)) sub.constrained_node_dofs.push_back(node * nc + c);

    std::vector<Point> coords;
    Point center{0.0, 0.0, 0.0};
    for (int node : problem.trace.local_node[s]) {
      coords.push_back(mesh.coordinates[static_cast<std::size_t>(node)]);
      for (int a = 0; a < 3; ++a) center[static_cast<std::size_t>(a)] += coords.back()[static_cast<std::size_t>(a)];
    }
    if (!coords.empty())
      for (auto& x : center) x /= static_cast<double>(coords.size());
    const Mat candidates = geometric_modes(spec.physics, spec.grid.dimension, coords,
                                           problem.trace.local_component[s], center);
    sub.R = rigid_body_modes(sub.K, candidates);
  });

  // Direct assembly over all elements, independent of the subdomain route.
  std::vector<Triplet> trips;
  for (int el = 0; el < mesh.num_elements(); ++el) {
    const auto& conn = mesh.elements[static_cast<std::size_t>(el)];
    std::vector<Point> xs;
    for (int n : conn) xs.push_back(mesh.coordinates[static_cast<std::size_t>(n)]);
    const double modulus =
        spec.material.modulus(partition.subdomains[static_cast<std::size_t>(partition.element_owner[static_cast<std::size_t>(el)])].block);
    const Mat Ke = element_stiffness(spec.physics, spec.grid.dimension, xs, modulus, spec.material.nu);
    std::vector<int> glob;
    for (int n : conn)
      for (int c = 0; c < nc; ++c) glob.push_back(layout.global_index[static_cast<std::size_t>(n * nc + c)]);
    for (std::size_t i = 0; i < glob.size(); ++i) {
      if (glob[i] < 0) continue;
      for (std::size_t j = 0; j < glob.size(); ++j)
        if (glob[j] >= 0) trips.emplace_back(glob[i], glob[j], Ke(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  problem.global_stiffness.resize(layout.num_free, layout.num_free);
  problem.global_stiffness.setFromTriplets(trips.begin(), trips.end());

  classify_boundary(problem);
  return problem;
}

Partition spring2_partition() {
  Partition part;
  part.subdomains.resize(2);
  part.subdomains[0].block = {0, 0, 0};
  part.subdomains[0].elements = {0};
  part.subdomains[0].nodes = {0, 1};
  part.subdomains[1].block = {1, 0, 0};
  part.subdomains[1].elements = {1};
  part.subdomains[1].nodes = {1, 2};
  part.multiplicity = {1, 2, 1};
  part.interface_nodes = {1};
  part.element_owner = {0, 1};
  return part;
}

DecomposedProblem make_spring2(double k1, double k2, double end_load, double interface_load,
                               RedundancyMode mode) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw ConfigError("spring stiffnesses must be positive");
  const Partition part = spring2_partition();
  const DofLayout layout = DofLayout::make(3, 1, {1, 0, 0});

  DecomposedProblem problem;
  problem.physics = Physics::scalar;
  problem.dimension = 1;
  problem.components = 1;
  problem.trace = build_trace_maps(part, layout);
  problem.jump = build_jump_operator(problem.trace, mode);

  problem.subdomains.resize(2);
  auto& s1 = problem.subdomains[0];
  s1.K.resize(1, 1);
  s1.K.insert(0, 0) = k1;
  s1.f = Vec::Constant(1, interface_load);
  s1.constrained_node_dofs = {0};

  auto& s2 = problem.subdomains[1];
  std::vector<Triplet> t{{0, 0, k2}, {0, 1, -k2}, {1, 0, -k2}, {1, 1, k2}};
  s2.K.resize(2, 2);
  s2.K.setFromTriplets(t.begin(), t.end());
  s2.f = Vec::Zero(2);
  s2.f[1] = end_load;

  for (auto& sub : problem.subdomains) sub.R = rigid_body_modes(sub.K, Mat::Ones(sub.K.rows(), 1));

  std::vector<Triplet> g{{0, 0, k1 + k2}, {0, 1, -k2}, {1, 0, -k2}, {1, 1, k2}};
  problem.global_stiffness.resize(2, 2);
  problem.global_stiffness.setFromTriplets(g.begin(), g.end());
  problem.global_force = Vec(2);
  problem.global_force << interface_load, end_load;
  classify_boundary(problem);
  return problem;
}

}  // namespace fetilab
