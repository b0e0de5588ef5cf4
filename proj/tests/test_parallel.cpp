#include "doctest.h"
#include "fetilab/bdd.hpp"
#include "fetilab/feti.hpp"
#include "test_support.hpp"

#include <omp.h>

using namespace fetilab;
using namespace fetilab::testing;

namespace {

bool identical(const Vec& a, const Vec& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * std::size_t(a.size())) == 0;
}

ProblemSpec mixed_problem() {
  ProblemSpec spec = grid_spec(2, {4, 3, 1}, {4, 4, 1}, Physics::elasticity);
  spec.material.pattern = MaterialPattern::checkerboard;
  spec.material.e2 = 1e3;
  spec.grid.slant_degrees = 30.0;
  return spec;
}

struct ThreadGuard {
  int saved = omp_get_max_threads();
  explicit ThreadGuard(int n) { omp_set_num_threads(n); }
  ~ThreadGuard() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("parallel loop visits every index once and rethrows") {
    ThreadGuard threads(4);
    std::vector<int> hits(100, 0);
    for_each_subdomain(Execution::parallel, hits.size(), [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(for_each_subdomain(Execution::parallel, 10,
                                       [](std::size_t i) {
                                         if (i == 7) throw NumericalError("boom");
                                       }),
                    NumericalError);
  }

  TEST_CASE("local operators are bitwise identical") {
    ThreadGuard threads(4);
    const auto p = build_problem(mixed_problem());
    const auto serial = build_subdomain_operators(p, Execution::serial);
    const auto parallel = build_subdomain_operators(p, Execution::parallel);
    for (std::size_t s = 0; s < serial.size(); ++s) {
      CHECK(serial[s].schur == parallel[s].schur);
      CHECK(identical(serial[s].diagonal, parallel[s].diagonal));
    }
  }

  TEST_CASE("FETI kernels: serial reference equals the OpenMP path bitwise") {
    ThreadGuard threads(4);
    const auto p = build_problem(mixed_problem());
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const auto forces = split_forces(SplitKind::raw, p, ops);
    const DualInterfaceSystem ds(p, ops, forces, Execution::serial), dp(p, ops, forces, Execution::parallel);
    CHECK(identical(ds.d(), dp.d()));
    std::mt19937 rng(1);
    const Vec l = random_vector(rng, ds.num_multipliers());
    CHECK(identical(ds.apply_F(l), dp.apply_F(l)));
    for (auto kind : {PreconditionerKind::lumped, PreconditionerKind::dirichlet}) {
      const Preconditioner ps(p, ops, kind, ScalingKind::stiffness, Execution::serial);
      const Preconditioner pp(p, ops, kind, ScalingKind::stiffness, Execution::parallel);
      CHECK(identical(ps.apply(l), pp.apply(l)));
    }
    const Vec alpha = random_vector(rng, ds.num_modes());
    const auto us = ds.recover(l, alpha), up = dp.recover(l, alpha);
    for (std::size_t s = 0; s < us.size(); ++s) CHECK(identical(us[s], up[s]));
  }

  TEST_CASE("BDD kernels: serial reference equals the OpenMP path bitwise") {
    ThreadGuard threads(4);
    const auto p = build_problem(mixed_problem());
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const PrimalInterfaceSystem ss(p, ops, Execution::serial), sp(p, ops, Execution::parallel);
    CHECK(identical(ss.rhs(), sp.rhs()));
    std::mt19937 rng(2);
    const Vec x = random_vector(rng, ss.size());
    CHECK(identical(ss.apply_S(x), sp.apply_S(x)));
    const NeumannNeumann ns(ss, p, ops, Execution::serial), np(sp, p, ops, Execution::parallel);
    CHECK(identical(ns.apply(x), np.apply(x)));
  }

  TEST_CASE("whole solves produce identical histories") {
    ThreadGuard threads(3);
    const auto p = build_problem(mixed_problem());
    FetiOptions fs;
    fs.execution = Execution::serial;
    FetiOptions fp = fs;
    fp.execution = Execution::parallel;
    const auto rs = solve_feti(p, fs), rp = solve_feti(p, fp);
    REQUIRE(rs.history.size() == rp.history.size());
    for (std::size_t k = 0; k < rs.history.size(); ++k) {
      CHECK(rs.history.entries[k].interface_residual == rp.history.entries[k].interface_residual);
      CHECK(rs.history.entries[k].global_residual == rp.history.entries[k].global_residual);
    }
    CHECK(identical(rs.u_global, rp.u_global));

    BddOptions bs;
    bs.execution = Execution::serial;
    BddOptions bp = bs;
    bp.execution = Execution::parallel;
    const auto qs = solve_bdd(p, bs), qp = solve_bdd(p, bp);
    CHECK(qs.krylov.iterations == qp.krylov.iterations);
    CHECK(identical(qs.u_global, qp.u_global));
  }
}
