#include "doctest.h"
#include "fetilab/assembly.hpp"
#include "fetilab/problem.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <array>
#include <map>

using namespace fetilab;
using namespace fetilab::testing;

namespace {

const std::vector<Point> kUnitSquare{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
const std::vector<Point> kUnitCube{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                   {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

Mat rigid_modes_2d(const std::vector<Point>& xs) {
  Mat R = Mat::Zero(2 * static_cast<Eigen::Index>(xs.size()), 3);
  for (std::size_t a = 0; a < xs.size(); ++a) {
    const auto i = 2 * static_cast<Eigen::Index>(a);
    R(i, 0) = 1;
    R(i + 1, 1) = 1;
    R(i, 2) = -xs[a][1];
    R(i + 1, 2) = xs[a][0];
  }
  return R;
}

Mat rigid_modes_3d(const std::vector<Point>& xs) {
  Mat R = Mat::Zero(3 * static_cast<Eigen::Index>(xs.size()), 6);
  for (std::size_t a = 0; a < xs.size(); ++a) {
    const auto i = 3 * static_cast<Eigen::Index>(a);
    const double x = xs[a][0], y = xs[a][1], z = xs[a][2];
    for (int c = 0; c < 3; ++c) R(i + c, c) = 1;
    R(i, 3) = -y, R(i + 1, 3) = x;
    R(i + 1, 4) = -z, R(i + 2, 4) = y;
    R(i, 5) = z, R(i + 2, 5) = -x;
  }
  return R;
}

int count_small_eigenvalues(const Mat& K, double rel) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(K);
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  int n = 0;
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    CHECK(eig.eigenvalues()[i] >= -1e-10 * top);
    if (std::abs(eig.eigenvalues()[i]) <= rel * top) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("fe_assembly") {
  TEST_CASE("scalar Q1 element reduces to a 1D bar") {
    const double k = 3.0;
    const Mat Ke = element_stiffness(Physics::scalar, 2, kUnitSquare, k, 0.0);
    // u constant along y: nodes 0,3 carry u_left, nodes 1,2 carry u_right.
    Mat T = Mat::Zero(4, 2);
    T(0, 0) = T(3, 0) = 1;
    T(1, 1) = T(2, 1) = 1;
    const Mat bar = T.transpose() * Ke * T;
    CHECK(bar(0, 0) == doctest::Approx(k));
    CHECK(bar(0, 1) == doctest::Approx(-k));
    CHECK(bar(1, 1) == doctest::Approx(k));
  }

  TEST_CASE("scalar element: symmetric, zero row sums, one null vector") {
    for (const auto* xs : {&kUnitSquare, &kUnitCube}) {
      const int dim = xs->size() == 4 ? 2 : 3;
      const Mat Ke = element_stiffness(Physics::scalar, dim, *xs, 1.0, 0.0);
      CHECK((Ke - Ke.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Ke.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
      CHECK(count_small_eigenvalues(Ke, 1e-12) == 1);
    }
  }

  TEST_CASE("elasticity element annihilates rigid-body modes") {
    const std::vector<Point> skew{{0, 0, 0}, {2, 0.2, 0}, {2.5, 1.5, 0}, {0.3, 1, 0}};
    for (const auto* xs : {&kUnitSquare, &skew}) {
      const Mat Ke = element_stiffness(Physics::elasticity, 2, *xs, 1.0, 0.3);
      CHECK((Ke * rigid_modes_2d(*xs)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(count_small_eigenvalues(Ke, 1e-10) == 3);
    }
    const Mat Ke3 = element_stiffness(Physics::elasticity, 3, kUnitCube, 1.0, 0.3);
    CHECK((Ke3 * rigid_modes_3d(kUnitCube)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(count_small_eigenvalues(Ke3, 1e-10) == 6);
  }

  TEST_CASE("element stiffness scales linearly with the modulus") {
    const Mat a = element_stiffness(Physics::elasticity, 2, kUnitSquare, 1.0, 0.25);
    const Mat b = element_stiffness(Physics::elasticity, 2, kUnitSquare, 1e5, 0.25);
    CHECK((b - 1e5 * a).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("degenerate or inverted elements are rejected") {
    std::vector<Point> flipped = kUnitSquare;
    std::swap(flipped[1], flipped[3]);
    CHECK_THROWS_AS(element_stiffness(Physics::scalar, 2, flipped, 1.0, 0.0), NumericalError);
    const std::vector<Point> flat{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    CHECK_THROWS_AS(element_stiffness(Physics::elasticity, 2, flat, 1.0, 0.3), NumericalError);
  }

  TEST_CASE("material validation and patterns") {
    MaterialField m;
    m.e1 = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m.e1 = 1.0;
    m.nu = 0.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m.nu = 0.3;
    m.pattern = MaterialPattern::checkerboard;
    m.e2 = 7.0;
    CHECK(m.modulus({0, 0, 0}) == 1.0);
    CHECK(m.modulus({1, 0, 0}) == 7.0);
    CHECK(m.modulus({1, 1, 0}) == 1.0);
    CHECK(m.modulus({1, 1, 1}) == 7.0);
    m.pattern = MaterialPattern::layers;
    m.layer_axis = 1;
    CHECK(m.modulus({1, 0, 0}) == 1.0);
    CHECK(m.modulus({0, 1, 0}) == 7.0);
  }

  TEST_CASE("spring2 subdomain systems") {
    const auto p = make_spring2();
    REQUIRE(p.num_subdomains() == 2);
    const auto& s1 = p.subdomains[0];
    const auto& s2 = p.subdomains[1];
    CHECK(Mat(s1.K) == Mat::Constant(1, 1, 1.0));
    CHECK(s1.f.size() == 1);
    CHECK(s1.f[0] == 0.0);
    Mat K2(2, 2);
    K2 << 1, -1, -1, 1;
    CHECK(Mat(s2.K) == K2);
    CHECK(s2.f[0] == 0.0);
    CHECK(s2.f[1] == 1.0);
    CHECK(s1.R.cols() == 0);
    REQUIRE(s2.R.cols() == 1);
    CHECK(s2.R(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(s2.R(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  TEST_CASE("2x2 uniform partition: subdomain matrices equal up to permutation") {
    GridSpec g;
    g.dimension = 2;
    g.elements = {4, 4, 1};
    g.subdomains = {2, 2, 1};
    const Mesh mesh = build_structured_mesh(g);
    const Partition part = partition_blocks(mesh, g);
    for (Physics phys : {Physics::scalar, Physics::elasticity}) {
      const int nc = components_for(phys, 2);
      const auto layout =
          DofLayout::make(mesh.num_nodes(), nc, std::vector<char>(static_cast<std::size_t>(mesh.num_nodes() * nc), 0));
      const auto trace = build_trace_maps(part, layout);
      MaterialField mat;
      // local dof -> (relative i, relative j, component)
      auto keys = [&](int s) {
        std::vector<std::array<int, 3>> k;
        const auto& block = part.subdomains[static_cast<std::size_t>(s)].block;
        for (int l = 0; l < trace.local_size(s); ++l) {
          const auto ij = mesh.node_grid_index(trace.local_node[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)]);
          k.push_back({ij[0] - 2 * block[0], ij[1] - 2 * block[1], trace.local_component[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)]});
        }
        return k;
      };
      const Mat K0 = Mat(assemble_subdomain_stiffness(mesh, part, trace, layout, 0, phys, mat));
      const auto k0 = keys(0);
      std::map<std::array<int, 3>, int> index0;
      for (std::size_t l = 0; l < k0.size(); ++l) index0[k0[l]] = static_cast<int>(l);
      for (int s = 1; s < 4; ++s) {
        const Mat Ks = Mat(assemble_subdomain_stiffness(mesh, part, trace, layout, s, phys, mat));
        const auto ks = keys(s);
        REQUIRE(ks.size() == k0.size());
        double dev = 0.0;
        for (std::size_t a = 0; a < ks.size(); ++a)
          for (std::size_t b = 0; b < ks.size(); ++b)
            dev = std::max(dev, std::abs(Ks(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                                         K0(index0.at(ks[a]), index0.at(ks[b]))));
        CHECK(dev < 1e-14);
      }
    }
  }

  TEST_CASE("floating 2D elasticity subdomain has 3 orthonormal modes") {
    ProblemSpec spec = grid_spec(2, {2, 1, 1}, {2, 2, 1}, Physics::elasticity);
    const auto p = build_problem(spec);
    const auto& floating = p.subdomains[1];
    REQUIRE(floating.R.cols() == 3);
    CHECK((floating.R.transpose() * floating.R - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((floating.K * floating.R).norm() <= 1e-10 * Mat(floating.K).norm());
    CHECK(p.subdomains[0].R.cols() == 0);
  }

  TEST_CASE("3D elasticity: interior subdomain floats with 6 modes") {
    ProblemSpec spec = grid_spec(3, {2, 1, 1}, {2, 2, 2}, Physics::elasticity);
    const auto p = build_problem(spec);
    CHECK(p.subdomains[0].R.cols() == 0);
    REQUIRE(p.subdomains[1].R.cols() == 6);
    CHECK((p.subdomains[1].K * p.subdomains[1].R).norm() <= 1e-10 * Mat(p.subdomains[1].K).norm());
  }

  TEST_CASE("rigid_body_modes keeps only annihilated candidates") {
    const auto p = make_spring2();
    Mat cand(2, 2);
    cand << 1, 0, 1, 1;  // constant and a non-kernel vector
    const Mat R = rigid_body_modes(p.subdomains[1].K, cand);
    REQUIRE(R.cols() == 1);
    CHECK(std::abs(R(0, 0) - R(1, 0)) < 1e-14);
  }

  TEST_CASE("stacked L^T K L equals direct global assembly") {
    for (auto spec : {checkerboard_2d(3), grid_spec(3, {2, 2, 2}, {2, 2, 2}, Physics::elasticity)}) {
      spec.grid.slant_degrees = 30.0;
      const auto p = build_problem(spec);
      const Mat L = Mat(p.trace.stacked());
      const Mat assembled = L.transpose() * stacked_stiffness(p) * L;
      const Mat direct = Mat(p.global_stiffness);
      CHECK((assembled - direct).cwiseAbs().maxCoeff() <= 1e-12 * direct.cwiseAbs().maxCoeff());
      Vec f = Vec::Zero(p.trace.global_size);
      for (int s = 0; s < p.num_subdomains(); ++s)
        for (int l = 0; l < p.trace.local_size(s); ++l)
          f[p.trace.local_to_global[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)]] +=
              p.subdomains[static_cast<std::size_t>(s)].f[l];
      CHECK((f - p.global_force).norm() <= 1e-14 * p.global_force.norm());
    }
  }

  TEST_CASE("subdomain matrices are symmetric PSD for every pattern") {
    for (auto pattern : {MaterialPattern::uniform, MaterialPattern::checkerboard, MaterialPattern::layers}) {
      ProblemSpec spec = checkerboard_2d(3);
      spec.material.pattern = pattern;
      spec.physics = Physics::elasticity;
      const auto p = build_problem(spec);
      for (const auto& sub : p.subdomains) {
        const Mat K = Mat(sub.K);
        CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * K.cwiseAbs().maxCoeff());
        count_small_eigenvalues(K, 1e-10);
      }
    }
  }

  TEST_CASE("checkerboard: swapping moduli and reflecting the grid permutes K") {
    ProblemSpec a = grid_spec(2, {2, 2, 1}, {3, 3, 1});
    a.material.pattern = MaterialPattern::checkerboard;
    a.material.e1 = 1.0;
    a.material.e2 = 10.0;
    ProblemSpec b = a;
    std::swap(b.material.e1, b.material.e2);
    const auto pa = build_problem(a);
    const auto pb = build_problem(b);
    // Free node (i, j), i >= 1, has global index (i - 1) + 6 * j; reflection maps j -> 6 - j.
    const int nx = 6, ny = 6;
    std::vector<int> perm(static_cast<std::size_t>(nx * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
      for (int i = 1; i <= nx; ++i) perm[static_cast<std::size_t>((i - 1) + nx * j)] = (i - 1) + nx * (ny - j);
    const Mat Ka = Mat(pa.global_stiffness), Kb = Mat(pb.global_stiffness);
    REQUIRE(Ka.rows() == static_cast<Eigen::Index>(perm.size()));
    double dev = 0.0;
    for (std::size_t r = 0; r < perm.size(); ++r)
      for (std::size_t c = 0; c < perm.size(); ++c)
        dev = std::max(dev, std::abs(Ka(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) -
                                     Kb(perm[r], perm[c])));
    CHECK(dev <= 1e-12 * Ka.cwiseAbs().maxCoeff());
  }

  TEST_CASE("face loads integrate to magnitude times face area") {
    GridSpec g;
    g.dimension = 2;
    g.elements = {4, 4, 1};
    const Mesh m = build_structured_mesh(g);
    LoadSpec load;
    load.magnitude = 2.5;
    const Vec fs = nodal_loads(m, Physics::scalar, load);
    CHECK(fs.sum() == doctest::Approx(2.5 * 4.0));
    const Vec fe = nodal_loads(m, Physics::elasticity, load);
    double fx = 0.0, fy = 0.0;
    for (Eigen::Index i = 0; i < fe.size(); i += 2) fx += fe[i], fy += fe[i + 1];
    CHECK(fx == doctest::Approx(-2.5 * 4.0));
    CHECK(fy == doctest::Approx(0.0));
    // corner nodes carry half of an edge share
    CHECK(fs[m.node_index(4, 0)] == doctest::Approx(1.25));
    CHECK(fs[m.node_index(4, 2)] == doctest::Approx(2.5));
  }

  TEST_CASE("loads on Dirichlet dofs are dropped") {
    ProblemSpec spec = grid_spec(2, {2, 1, 1}, {2, 2, 1});
    spec.load.kind = LoadKind::body;
    const auto p = build_problem(spec);
    GridSpec g = spec.grid;
    const Mesh m = build_structured_mesh(g);
    const Vec nodal = nodal_loads(m, Physics::scalar, spec.load);
    double clamped = 0.0;
    for (int j = 0; j <= 2; ++j) clamped += nodal[m.node_index(0, j)];
    CHECK(clamped > 0.0);
    CHECK(p.global_force.sum() == doctest::Approx(nodal.sum() - clamped));
  }

  TEST_CASE("raw assignment: owner vs multiplicity") {
    ProblemSpec spec = grid_spec(2, {2, 1, 1}, {2, 2, 1});
    spec.load.kind = LoadKind::body;
    const auto owner = build_problem(spec);
    spec.raw_assignment = RawAssignment::multiplicity;
    const auto shared = build_problem(spec);
    for (const auto* p : {&owner, &shared}) {
      const Vec assembled = p->trace.assemble(p->raw_forces());
      CHECK((assembled - p->global_force).norm() <= 1e-14 * p->global_force.norm());
    }
    // interface node dofs of subdomain 1 carry nothing under ownership
    for (int b : owner.subdomains[1].boundary) CHECK(owner.subdomains[1].f[b] == 0.0);
    for (int b : shared.subdomains[1].boundary) CHECK(shared.subdomains[1].f[b] > 0.0);
  }
}
