#include "fetilab/feti.hpp"

#include <chrono>
#include <cmath>
#include <memory>

namespace fetilab {

std::string to_string(ProjectorKind kind) {
  switch (kind) {
    case ProjectorKind::identity:
      return "identity";
    case ProjectorKind::superlumped:
      return "superlumped";
    case ProjectorKind::dirichlet:
      return "dirichlet";
  }
  return "unknown";
}

std::string to_string(PreconditionerKind kind) {
  return kind == PreconditionerKind::lumped ? "lumped" : "dirichlet";
}

std::string to_string(ScalingKind kind) { return kind == ScalingKind::multiplicity ? "multiplicity" : "stiffness"; }

std::string to_string(InitKind kind) { return kind == InitKind::standard ? "standard" : "new"; }

std::string to_string(StoppingKind kind) {
  return kind == StoppingKind::global_residual ? "global" : "interface";
}

DualInterfaceSystem::DualInterfaceSystem(const DecomposedProblem& problem,
                                         const std::vector<SubdomainOperators>& ops,
                                         const SplitForces& forces, Execution exec)
    : problem_(problem), ops_(ops), forces_(forces), exec_(exec) {
  const int n = problem.num_subdomains();
  const int m = problem.num_multipliers();
  mode_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int s = 0; s < n; ++s)
    mode_offsets_[static_cast<std::size_t>(s) + 1] =
        mode_offsets_[static_cast<std::size_t>(s)] + problem.subdomains[static_cast<std::size_t>(s)].num_modes();
  const int modes = mode_offsets_.back();

  std::vector<Vec> local(static_cast<std::size_t>(n));
  for_each_subdomain(exec_, local.size(), [&](std::size_t s) {
    local[s] = ops_[s].kplus.apply_pseudo(forces_.forces[s]);
  });
  d_ = Vec::Zero(m);
  for (int s = 0; s < n; ++s) problem.jump.add_apply(s, local[static_cast<std::size_t>(s)], d_);

  G_ = Mat::Zero(m, modes);
  e_ = Vec::Zero(modes);
  for (int s = 0; s < n; ++s) {
    const auto& sub = problem.subdomains[static_cast<std::size_t>(s)];
    const int off = mode_offsets_[static_cast<std::size_t>(s)];
    for (int k = 0; k < sub.num_modes(); ++k) {
      Vec col = Vec::Zero(m);
      problem.jump.add_apply(s, sub.R.col(k), col);
      G_.col(off + k) = col;
      e_[off + k] = sub.R.col(k).dot(forces_.forces[static_cast<std::size_t>(s)]);
    }
  }
  if (modes > 0) {
    Eigen::ColPivHouseholderQR<Mat> qr(G_);
    qr.setThreshold(1e-10);
    if (qr.rank() < modes) throw NumericalError("rank-deficient coarse matrix G = B R");
  }
}

Vec DualInterfaceSystem::apply_F(const Vec& lambda) const {
  const auto n = static_cast<std::size_t>(problem_.num_subdomains());
  std::vector<Vec> local(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) {
    Vec v = Vec::Zero(problem_.subdomains[s].size());
    problem_.jump.add_transpose(static_cast<int>(s), lambda, v);
    local[s] = ops_[s].kplus.apply_pseudo(v);
  });
  Vec out = Vec::Zero(lambda.size());
  for (std::size_t s = 0; s < n; ++s) problem_.jump.add_apply(static_cast<int>(s), local[s], out);
  return out;
}

std::vector<Vec> DualInterfaceSystem::recover(const Vec& lambda, const Vec& alpha) const {
  const auto n = static_cast<std::size_t>(problem_.num_subdomains());
  std::vector<Vec> u(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) {
    const auto& sub = problem_.subdomains[s];
    Vec rhs = forces_.forces[s];
    problem_.jump.add_transpose(static_cast<int>(s), lambda, rhs, -1.0);
    u[s] = ops_[s].kplus.apply_pseudo(rhs);
    if (sub.num_modes() > 0) u[s] -= sub.R * alpha.segment(mode_offsets_[s], sub.num_modes());
  });
  return u;
}

Mat DualInterfaceSystem::assemble_dense_F() const {
  const int m = num_multipliers();
  if (m > 2000) throw ConfigError("dense F assembly limited to 2000 multipliers");
  Mat F(m, m);
  for (int j = 0; j < m; ++j) F.col(j) = apply_F(Vec::Unit(m, j));
  return 0.5 * (F + F.transpose());
}

std::vector<Vec> scaling_weights(const DecomposedProblem& problem, ScalingKind scaling) {
  std::vector<Vec> w;
  for (const auto& sub : problem.subdomains)
    w.push_back(scaling == ScalingKind::multiplicity ? Vec::Ones(sub.size()) : Vec(sub.K.diagonal().cwiseInverse()));
  return w;
}

Preconditioner::Preconditioner(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                               PreconditionerKind kind, ScalingKind scaling, Execution exec)
    : problem_(problem), ops_(ops), kind_(kind), exec_(exec),
      scaled_(problem.jump, scaling_weights(problem, scaling)) {
  if (kind_ == PreconditionerKind::lumped)
    for (const auto& op : ops_) lumped_blocks_.push_back(Mat(op.condenser.boundary_block()));
}

Vec Preconditioner::apply(const Vec& r) const {
  const Vec mu = scaled_.block_inverse(r);
  const auto n = static_cast<std::size_t>(problem_.num_subdomains());
  std::vector<Vec> local(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) {
    const auto& sub = problem_.subdomains[s];
    const Vec v = scaled_.transpose_local(static_cast<int>(s), mu, sub.size());
    const Vec vb = gather(v, sub.boundary);
    const Vec yb = kind_ == PreconditionerKind::dirichlet ? Vec(ops_[s].schur * vb) : Vec(lumped_blocks_[s] * vb);
    Vec y = Vec::Zero(sub.size());
    scatter_add(yb, sub.boundary, y);
    local[s] = scaled_.weights(static_cast<int>(s)).cwiseProduct(y);
  });
  Vec out = Vec::Zero(r.size());
  for (std::size_t s = 0; s < n; ++s) problem_.jump.add_apply(static_cast<int>(s), local[s], out);
  return scaled_.block_inverse(out);
}

LinearMap make_Q(ProjectorKind kind, const DecomposedProblem& problem,
                 const std::vector<SubdomainOperators>& ops, ScalingKind scaling, Execution exec) {
  switch (kind) {
    case ProjectorKind::identity:
      return [](const Vec& x) { return x; };
    case ProjectorKind::superlumped: {
      auto inv = std::make_shared<JumpBlockInverse>(problem.jump, scaling_weights(problem, ScalingKind::stiffness));
      return [inv](const Vec& x) { return inv->apply(x); };
    }
    case ProjectorKind::dirichlet: {
      auto pre = std::make_shared<Preconditioner>(problem, ops, PreconditionerKind::dirichlet, scaling, exec);
      return [pre](const Vec& x) { return pre->apply(x); };
    }
  }
  throw ConfigError("unknown projector kind");
}

Projector::Projector(Mat G, const LinearMap& Q) : G_(std::move(G)) {
  const auto modes = G_.cols();
  QG_.resize(G_.rows(), modes);
  for (Eigen::Index k = 0; k < modes; ++k) QG_.col(k) = Q(G_.col(k));
  if (modes == 0) return;
  const Mat GtQG = G_.transpose() * QG_;
  coarse_.compute(GtQG);
  coarse_t_.compute(GtQG.transpose());
  if (!(coarse_.rcond() > 1e-15)) throw NumericalError("coarse matrix G^T Q G is singular");
}

Vec Projector::project(const Vec& x) const {
  if (trivial()) return x;
  return x - QG_ * coarse_.solve(G_.transpose() * x);
}

Vec Projector::project_transpose(const Vec& x) const {
  if (trivial()) return x;
  return x - G_ * coarse_t_.solve(QG_.transpose() * x);
}

Vec Projector::coarse_lift(const Vec& e) const {
  if (trivial()) return Vec::Zero(G_.rows());
  return QG_ * coarse_.solve(e);
}

Vec Projector::coarse_amplitudes(const Vec& r) const {
  if (trivial()) return Vec(0);
  return coarse_t_.solve(QG_.transpose() * r);
}

Vec compute_lambda00(const DecomposedProblem& problem, const std::vector<Vec>& condensed) {
  std::vector<Vec> local;
  for (std::size_t s = 0; s < problem.subdomains.size(); ++s) {
    const auto& sub = problem.subdomains[s];
    Vec v = Vec::Zero(sub.size());
    scatter_add(condensed[s], sub.boundary, v);
    local.push_back(std::move(v));
  }
  const ScaledJump scaled(problem.jump, scaling_weights(problem, ScalingKind::stiffness));
  return scaled.apply(local);
}

Vec compute_lambda0(const Vec& lambda00, const Projector& projector, const Vec& e) {
  return projector.project(lambda00) + projector.coarse_lift(e);
}

FetiResult solve_feti(const DecomposedProblem& problem, const FetiOptions& options) {
  const auto ops = build_subdomain_operators(problem, options.execution);
  return solve_feti(problem, ops, options);
}

FetiResult solve_feti(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                      const FetiOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const auto start = std::chrono::steady_clock::now();
  const Execution exec = options.execution;

  const SplitForces forces = split_forces(options.splitting, problem, ops);
  const DualInterfaceSystem dual(problem, ops, forces, exec);
  const Preconditioner precond(problem, ops, options.preconditioner, options.scaling, exec);
  const Projector projector(dual.G(), make_Q(options.projector, problem, ops, options.scaling, exec));

  FetiResult result;
  result.lambda00 = Vec::Zero(dual.num_multipliers());
  if (options.init == InitKind::new_estimate) {
    std::vector<Vec> condensed;
    for (std::size_t s = 0; s < ops.size(); ++s) condensed.push_back(ops[s].condenser.condense(forces.forces[s]));
    result.lambda00 = compute_lambda00(problem, condensed);
  }
  result.lambda0 = compute_lambda0(result.lambda00, projector, dual.e());

  std::vector<Vec> weights;
  for (const auto& sub : problem.subdomains)
    weights.push_back(options.scaling == ScalingKind::stiffness ? Vec(sub.K.diagonal()) : Vec::Ones(sub.size()));

  auto primal_residual = [&](const Vec& lambda, const Vec& residual) {
    const Vec alpha = projector.coarse_amplitudes(residual);
    const auto u = dual.recover(lambda, alpha);
    return relative_global_residual(problem, weighted_average(problem.trace, u, weights));
  };

  const double e_norm = dual.e().norm();
  double last_global = 0.0;
  int last_global_iter = -1;
  ConvergenceFunctional functional;
  if (options.stopping == StoppingKind::global_residual) {
    functional = [&](const PcgState& st) {
      last_global = primal_residual(st.x, st.residual);
      last_global_iter = st.iteration;
      return last_global;
    };
  }
  IterateObserver observer = [&](const PcgState& st, double) {
    if (last_global_iter != st.iteration) {
      last_global = primal_residual(st.x, st.residual);
      last_global_iter = st.iteration;
    }
    const double defect = dual.num_modes() > 0 ? (dual.G().transpose() * st.x - dual.e()).norm() : 0.0;
    result.max_admissibility_defect =
        std::max(result.max_admissibility_defect, e_norm > 0.0 ? defect / e_norm : defect);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.entries.push_back({st.iteration, st.projected_residual.norm(), last_global, secs});
  };

  PcgOperators pcg_ops;
  pcg_ops.apply = [&](const Vec& x) { return dual.apply_F(x); };
  pcg_ops.precondition = [&](const Vec& x) { return precond.apply(x); };
  pcg_ops.project = [&](const Vec& x) { return projector.project(x); };
  pcg_ops.project_transpose = [&](const Vec& x) { return projector.project_transpose(x); };
  const Projector orthogonal(dual.G(), [](const Vec& x) { return x; });
  if (dual.num_modes() > 0) pcg_ops.constrain = [&](const Vec& x) { return orthogonal.project(x); };

  PcgSettings settings;
  settings.tolerance = options.epsilon;
  settings.max_iterations = options.max_iterations;
  settings.keep_directions = options.keep_directions;
  PcgResult solved = pcg(pcg_ops, dual.d(), result.lambda0, settings, functional, observer);

  result.lambda = std::move(solved.x);
  result.krylov = std::move(solved.report);
  result.converged = result.krylov.termination == Termination::converged;
  const Vec residual = dual.d() - dual.apply_F(result.lambda);
  result.alpha = projector.coarse_amplitudes(residual);
  result.u = dual.recover(result.lambda, result.alpha);
  result.u_global = weighted_average(problem.trace, result.u, weights);
  return result;
}

ExactnessReport exactness_check_DSplus(const DecomposedProblem& problem,
                                       const std::vector<SubdomainOperators>& ops, SplitKind splitting) {
  const SplitForces forces = split_forces(splitting, problem, ops);
  const DualInterfaceSystem dual(problem, ops, forces, Execution::serial);
  const Mat F = dual.assemble_dense_F();
  const Mat Fplus = small_pinv(F);
  const Vec& d = dual.d();
  const Mat& G = dual.G();
  const Vec& e = dual.e();

  const Projector projector(G, [&Fplus](const Vec& x) { return Vec(Fplus * x); });
  ExactnessReport rep;
  const Vec lambda00 = Fplus * d;
  rep.lambda0 = compute_lambda0(lambda00, projector, e);
  if (G.cols() > 0) {
    const Mat GtFG = G.transpose() * Fplus * G;
    rep.alpha = GtFG.llt().solve(G.transpose() * Fplus * d - e);
  } else {
    rep.alpha = Vec(0);
  }
  Vec r = F * rep.lambda0 - d;
  if (G.cols() > 0) r += G * rep.alpha;
  const double dn = d.norm();
  rep.compatibility_residual = dn > 0.0 ? r.norm() / dn : r.norm();

  // A projected CG started from lambda0 must stop before taking a step.
  PcgOperators pcg_ops;
  pcg_ops.apply = [&F](const Vec& x) { return Vec(F * x); };
  pcg_ops.project = [&](const Vec& x) { return projector.project(x); };
  pcg_ops.project_transpose = [&](const Vec& x) { return projector.project_transpose(x); };
  const Projector orthogonal(dual.G(), [](const Vec& x) { return x; });
  if (dual.num_modes() > 0) pcg_ops.constrain = [&](const Vec& x) { return orthogonal.project(x); };
  PcgSettings settings;
  settings.tolerance = 1e-8;
  settings.max_iterations = F.rows() + 1;
  const ConvergenceFunctional functional = [dn](const PcgState& st) {
    return dn > 0.0 ? st.projected_residual.norm() / dn : st.projected_residual.norm();
  };
  rep.cg_iterations = pcg(pcg_ops, d, rep.lambda0, settings, functional).report.iterations;
  return rep;
}

}  // namespace fetilab
