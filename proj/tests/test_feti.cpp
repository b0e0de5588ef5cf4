#include "doctest.h"
#include "fetilab/feti.hpp"
#include "fetilab/oracle.hpp"
#include "test_support.hpp"

using namespace fetilab;
using namespace fetilab::testing;

namespace {

/// Dense stacked operators built without the library's local kernels.
struct DenseDual {
  Mat B, Kplus, R, F, G;
  Vec f, d, e;
};

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) r += b.rows(), c += b.cols();
  Mat out = Mat::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows(), c += b.cols();
  }
  return out;
}

Vec stack(const std::vector<Vec>& parts) {
  Eigen::Index n = 0;
  for (const auto& v : parts) n += v.size();
  Vec out(n);
  n = 0;
  for (const auto& v : parts) out.segment(n, v.size()) = v, n += v.size();
  return out;
}

DenseDual dense_dual(const DecomposedProblem& p, const std::vector<Vec>& forces) {
  DenseDual dd;
  std::vector<Mat> kp, rs;
  for (const auto& s : p.subdomains) {
    kp.push_back(svd_pinv(Mat(s.K), 1e-10));
    rs.push_back(s.R);
  }
  dd.B = Mat(p.jump.stacked(p.trace));
  dd.Kplus = block_diag(kp);
  dd.R = block_diag(rs);
  dd.f = stack(forces);
  dd.F = dd.B * dd.Kplus * dd.B.transpose();
  dd.d = dd.B * dd.Kplus * dd.f;
  dd.G = dd.B * dd.R;
  dd.e = dd.R.transpose() * dd.f;
  return dd;
}

ProblemSpec small_checkerboard(Physics physics = Physics::scalar) {
  ProblemSpec spec = grid_spec(2, {3, 2, 1}, {3, 3, 1}, physics);
  spec.material.pattern = MaterialPattern::checkerboard;
  spec.material.e2 = 1e4;
  return spec;
}

FetiOptions tight(FetiOptions o = {}) {
  o.epsilon = 1e-9;
  o.stopping = StoppingKind::global_residual;
  return o;
}

}  // namespace

TEST_SUITE("feti") {
  TEST_CASE("spring2: dual operators, multiplier and displacements") {
    const auto p = make_spring2();
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const DualInterfaceSystem dual(p, ops, split_forces(SplitKind::raw, p, ops), Execution::serial);
    REQUIRE(dual.num_multipliers() == 1);
    REQUIRE(dual.num_modes() == 1);
    CHECK(dual.apply_F(Vec::Ones(1))[0] == doctest::Approx(1.25));
    CHECK(dual.d()[0] == doctest::Approx(0.25));
    CHECK(dual.G()(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(dual.e()[0] == doctest::Approx(1.0 / std::sqrt(2.0)));

    for (auto init : {InitKind::standard, InitKind::new_estimate}) {
      FetiOptions o;
      o.init = init;
      const auto r = solve_feti(p, o);
      CHECK(r.converged);
      CHECK(r.krylov.iterations == 0);
      CHECK(r.lambda[0] == doctest::Approx(-1.0));
      CHECK(r.u_global[0] == doctest::Approx(1.0));
      CHECK(r.u_global[1] == doctest::Approx(2.0));
    }
  }

  TEST_CASE("dual operators match dense formulas") {
    for (auto physics : {Physics::scalar, Physics::elasticity})
      for (auto mode : {RedundancyMode::non_redundant, RedundancyMode::fully_redundant}) {
        ProblemSpec spec = small_checkerboard(physics);
        spec.redundancy = mode;
        const auto p = build_problem(spec);
        const auto ops = build_subdomain_operators(p, Execution::serial);
        const auto forces = split_forces(SplitKind::raw, p, ops);
        const DualInterfaceSystem dual(p, ops, forces, Execution::serial);
        const DenseDual dd = dense_dual(p, forces.forces);
        CHECK((dual.assemble_dense_F() - dd.F).norm() <= 1e-8 * dd.F.norm());
        CHECK((dual.d() - dd.d).norm() <= 1e-8 * dd.d.norm());
        CHECK((dual.G() - dd.G).norm() <= 1e-12 * dd.G.norm());
        CHECK((dual.e() - dd.e).norm() <= 1e-12 * (1.0 + dd.e.norm()));
        std::mt19937 rng(3);
        const Vec l = random_vector(rng, dual.num_multipliers());
        CHECK((dual.apply_F(l) - dd.F * l).norm() <= 1e-8 * (dd.F * l).norm());
      }
  }

  TEST_CASE("preconditioners match B~ S B~^T and B~ K_bb B~^T") {
    const auto p = build_problem(small_checkerboard(Physics::elasticity));
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const Mat B = Mat(p.jump.stacked(p.trace));
    std::vector<Mat> Sblocks, Kblocks;
    for (std::size_t s = 0; s < p.subdomains.size(); ++s) {
      const auto& sub = p.subdomains[s];
      const Mat K = Mat(sub.K);
      Mat S = Mat::Zero(sub.size(), sub.size()), Kbb = S;
      const Mat Sref = schur_complement(sub.K, sub.boundary);
      for (std::size_t a = 0; a < sub.boundary.size(); ++a)
        for (std::size_t b = 0; b < sub.boundary.size(); ++b) {
          S(sub.boundary[a], sub.boundary[b]) = Sref(long(a), long(b));
          Kbb(sub.boundary[a], sub.boundary[b]) = K(sub.boundary[a], sub.boundary[b]);
        }
      Sblocks.push_back(S);
      Kblocks.push_back(Kbb);
    }
    for (auto scaling : {ScalingKind::multiplicity, ScalingKind::stiffness}) {
      const Vec a = stack(scaling_weights(p, scaling));
      const Mat Bt = svd_pinv(B * a.asDiagonal() * B.transpose(), 1e-10) * B * a.asDiagonal();
      std::mt19937 rng(4);
      const Vec r = random_vector(rng, p.num_multipliers());
      const Preconditioner dir(p, ops, PreconditionerKind::dirichlet, scaling, Execution::serial);
      const Preconditioner lump(p, ops, PreconditionerKind::lumped, scaling, Execution::serial);
      const Vec zd = Bt * block_diag(Sblocks) * Bt.transpose() * r;
      const Vec zl = Bt * block_diag(Kblocks) * Bt.transpose() * r;
      CHECK((dir.apply(r) - zd).norm() <= 1e-9 * zd.norm());
      CHECK((lump.apply(r) - zl).norm() <= 1e-9 * zl.norm());
    }
  }

  TEST_CASE("projector: G^T P x = 0, P^2 = P, admissible coarse lift") {
    const auto p = build_problem(small_checkerboard(Physics::elasticity));
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const DualInterfaceSystem dual(p, ops, split_forces(SplitKind::raw, p, ops), Execution::serial);
    const Mat& G = dual.G();
    std::mt19937 rng(5);
    for (auto kind : {ProjectorKind::identity, ProjectorKind::superlumped, ProjectorKind::dirichlet}) {
      const Projector P(G, make_Q(kind, p, ops, ScalingKind::stiffness, Execution::serial));
      for (int t = 0; t < 3; ++t) {
        const Vec x = random_vector(rng, G.rows());
        const Vec px = P.project(x);
        CHECK((G.transpose() * px).norm() <= 1e-12 * G.norm() * x.norm());
        CHECK((P.project(px) - px).norm() <= 1e-10 * x.norm());
        // <P^T y, x> = <y, P x>
        const Vec y = random_vector(rng, G.rows());
        CHECK(P.project_transpose(y).dot(x) == doctest::Approx(y.dot(px)).epsilon(1e-10));
      }
      const Vec lift = P.coarse_lift(dual.e());
      CHECK((G.transpose() * lift - dual.e()).norm() <= 1e-10 * dual.e().norm());
    }
  }

  TEST_CASE("superlumped Q equals (B diag(K)^-1 B^T)^+") {
    const auto p = build_problem(small_checkerboard());
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const Mat B = Mat(p.jump.stacked(p.trace));
    const Vec a = stack(scaling_weights(p, ScalingKind::stiffness));
    const Mat ref = svd_pinv(B * a.asDiagonal() * B.transpose(), 1e-10);
    const auto Q = make_Q(ProjectorKind::superlumped, p, ops, ScalingKind::stiffness, Execution::serial);
    std::mt19937 rng(6);
    const Vec x = random_vector(rng, p.num_multipliers());
    CHECK((Q(x) - ref * x).norm() <= 1e-10 * (ref * x).norm());
  }

  TEST_CASE("lambda00 and lambda0 match dense formulas") {
    const auto p = build_problem(small_checkerboard(Physics::elasticity));
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const auto forces = split_forces(SplitKind::raw, p, ops);
    std::vector<Vec> condensed, fb_local;
    for (std::size_t s = 0; s < ops.size(); ++s) {
      condensed.push_back(ops[s].condenser.condense(forces.forces[s]));
      Vec v = Vec::Zero(p.subdomains[s].size());
      for (std::size_t k = 0; k < p.subdomains[s].boundary.size(); ++k)
        v[p.subdomains[s].boundary[k]] = condensed.back()[long(k)];
      fb_local.push_back(v);
    }
    const Mat B = Mat(p.jump.stacked(p.trace));
    const Vec D = stack(scaling_weights(p, ScalingKind::stiffness));
    const Vec ref00 = svd_pinv(B * D.asDiagonal() * B.transpose(), 1e-10) * B * D.asDiagonal() * stack(fb_local);
    const Vec l00 = compute_lambda00(p, condensed);
    CHECK((l00 - ref00).norm() <= 1e-10 * ref00.norm());

    const DualInterfaceSystem dual(p, ops, forces, Execution::serial);
    const Mat& G = dual.G();
    const Projector P(G, [](const Vec& x) { return x; });
    const Vec l0 = compute_lambda0(l00, P, dual.e());
    const Mat GtG_inv = (G.transpose() * G).inverse();
    const Vec ref0 = (Mat::Identity(G.rows(), G.rows()) - G * GtG_inv * G.transpose()) * ref00 + G * GtG_inv * dual.e();
    CHECK((l0 - ref0).norm() <= 1e-10 * ref0.norm());
  }

  TEST_CASE("solve_feti agrees with the direct oracle for every option") {
    for (auto physics : {Physics::scalar, Physics::elasticity}) {
      ProblemSpec spec = small_checkerboard(physics);
      spec.material.e2 = 1e2;
      const auto p = build_problem(spec);
      const auto oracle = direct_oracle(p);
      for (auto proj : {ProjectorKind::identity, ProjectorKind::superlumped, ProjectorKind::dirichlet})
        for (auto init : {InitKind::standard, InitKind::new_estimate})
          for (auto pre : {PreconditionerKind::lumped, PreconditionerKind::dirichlet})
            for (auto scaling : {ScalingKind::multiplicity, ScalingKind::stiffness}) {
              FetiOptions o = tight();
              o.projector = proj;
              o.init = init;
              o.preconditioner = pre;
              o.scaling = scaling;
              const auto r = solve_feti(p, o);
              CAPTURE(to_string(proj));
              CAPTURE(to_string(init));
              CHECK(r.converged);
              CHECK(relative_error(r.u_global, oracle.u_global) <= 1e-8);
              CHECK(r.max_admissibility_defect <= 1e-10);
            }
    }
  }

  TEST_CASE("a tolerance below the rounding floor stagnates on an accurate iterate") {
    const auto p = build_problem(small_checkerboard(Physics::elasticity));
    FetiOptions o = tight();
    o.projector = ProjectorKind::dirichlet;
    o.scaling = ScalingKind::multiplicity;
    o.epsilon = 1e-12;
    const auto r = solve_feti(p, o);
    CHECK(!r.converged);
    CHECK(r.krylov.termination == Termination::stagnation);
    CHECK(r.krylov.iterations < o.max_iterations);
    CHECK(relative_error(r.u_global, direct_oracle(p).u_global) <= 1e-8);
    CHECK(r.max_admissibility_defect <= 1e-10);
  }

  TEST_CASE("fully redundant multipliers and 3D elasticity converge") {
    ProblemSpec spec = grid_spec(3, {2, 2, 2}, {2, 2, 2}, Physics::elasticity);
    spec.redundancy = RedundancyMode::fully_redundant;
    const auto p = build_problem(spec);
    const auto r = solve_feti(p, tight());
    CHECK(r.converged);
    CHECK(relative_error(r.u_global, direct_oracle(p).u_global) <= 1e-8);
  }

  TEST_CASE("no floating subdomains: the coarse problem is empty") {
    const auto p = build_problem(grid_spec(2, {1, 3, 1}, {3, 2, 1}));
    for (const auto& s : p.subdomains) REQUIRE(!s.floating());
    const auto r = solve_feti(p, tight());
    CHECK(r.converged);
    CHECK(r.alpha.size() == 0);
    CHECK(relative_error(r.u_global, direct_oracle(p).u_global) <= 1e-8);
  }

  TEST_CASE("condensed split with standard init reproduces the new init residuals") {
    for (auto physics : {Physics::scalar, Physics::elasticity}) {
      ProblemSpec spec = small_checkerboard(physics);
      spec.load.kind = LoadKind::body;
      const auto p = build_problem(spec);
      const auto ops = build_subdomain_operators(p, Execution::serial);
      FetiOptions a = tight();
      a.splitting = SplitKind::condensed;
      a.init = InitKind::standard;
      FetiOptions b = tight();
      b.splitting = SplitKind::raw;
      b.init = InitKind::new_estimate;
      const auto ra = solve_feti(p, ops, a);
      const auto rb = solve_feti(p, ops, b);
      CHECK(ra.converged);
      REQUIRE(ra.history.size() == rb.history.size());
      CHECK(ra.history.size() >= 2);
      // residuals are compared on the scale of the raw interface right-hand side
      const DualInterfaceSystem dual(p, ops, split_forces(SplitKind::raw, p, ops), Execution::serial);
      const double scale = dual.d().norm();
      for (std::size_t k = 0; k < ra.history.size(); ++k) {
        const double x = ra.history.entries[k].interface_residual, y = rb.history.entries[k].interface_residual;
        CHECK(std::abs(x - y) <= 1e-10 * scale);
      }
    }
  }

  TEST_CASE("lambda00 equals the jump correction of the condensed split") {
    const auto p = build_problem(small_checkerboard());
    const auto ops = build_subdomain_operators(p, Execution::serial);
    const auto raw = split_forces(SplitKind::raw, p, ops);
    const auto cond = split_forces(SplitKind::condensed, p, ops);
    std::vector<Vec> condensed;
    for (std::size_t s = 0; s < ops.size(); ++s) condensed.push_back(ops[s].condenser.condense(raw.forces[s]));
    const Vec l00 = compute_lambda00(p, condensed);
    for (int s = 0; s < p.num_subdomains(); ++s) {
      Vec expect = raw.forces[std::size_t(s)];
      p.jump.add_transpose(s, l00, expect, -1.0);
      CHECK((cond.forces[std::size_t(s)] - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
  }

  TEST_CASE("exact D = S^+ and Q = F^+ give a converged initial guess") {
    for (auto physics : {Physics::scalar, Physics::elasticity}) {
      const auto p = build_problem(small_checkerboard(physics));
      const auto ops = build_subdomain_operators(p, Execution::serial);
      const auto rep = exactness_check_DSplus(p, ops);
      CHECK(rep.compatibility_residual <= 1e-8);
      CHECK(rep.cg_iterations == 0);
    }
  }

  TEST_CASE("new initialization lowers the initial residual on a checkerboard") {
    const auto p = build_problem(checkerboard_2d(4));
    for (auto proj : {ProjectorKind::superlumped, ProjectorKind::dirichlet}) {
      FetiOptions s = tight(), n = tight();
      s.projector = n.projector = proj;
      s.init = InitKind::standard;
      n.init = InitKind::new_estimate;
      const auto rs = solve_feti(p, s), rn = solve_feti(p, n);
      CHECK(rn.history.initial().global_residual < rs.history.initial().global_residual);
      CHECK(rn.krylov.iterations <= rs.krylov.iterations);
    }
  }

  TEST_CASE("interface stopping criterion and iteration cap") {
    const auto p = build_problem(checkerboard_2d(4));
    FetiOptions o;
    o.stopping = StoppingKind::interface_residual;
    o.init = InitKind::standard;
    o.projector = ProjectorKind::identity;
    const auto r = solve_feti(p, o);
    CHECK(r.converged);
    CHECK(r.krylov.functional.back() <= o.epsilon);
    o.max_iterations = 1;
    o.epsilon = 1e-14;
    const auto capped = solve_feti(p, o);
    CHECK(!capped.converged);
    CHECK(capped.krylov.termination == Termination::max_iterations);
    o.epsilon = 0.0;
    CHECK_THROWS_AS(solve_feti(p, o), ConfigError);
  }

  TEST_CASE("history rows carry both residuals") {
    const auto p = build_problem(checkerboard_2d(3));
    const auto r = solve_feti(p, FetiOptions{});
    REQUIRE(!r.history.empty());
    for (std::size_t k = 0; k < r.history.size(); ++k) {
      CHECK(r.history.entries[k].iteration == int(k));
      CHECK(r.history.entries[k].interface_residual >= 0.0);
      CHECK(r.history.entries[k].global_residual >= 0.0);
    }
    CHECK(r.history.final().global_residual <= 1e-6);
    CHECK(relative_global_residual(p, r.u_global) == doctest::Approx(r.history.final().global_residual).epsilon(1e-6));
  }

  TEST_CASE("option names") {
    CHECK(to_string(ProjectorKind::superlumped) == "superlumped");
    CHECK(to_string(PreconditionerKind::lumped) == "lumped");
    CHECK(to_string(ScalingKind::stiffness) == "stiffness");
    CHECK(to_string(InitKind::new_estimate) == "new");
    CHECK(to_string(StoppingKind::interface_residual) == "interface");
  }
}
