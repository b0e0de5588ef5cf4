#include "fetilab/bdd.hpp"

#include <algorithm>
#include <chrono>

namespace fetilab {

namespace {

/// Orthonormal basis of range(R) restricted to rows `rows`.
Mat boundary_kernel(const Mat& R, const std::vector<int>& rows) {
  Mat Rb(static_cast<Eigen::Index>(rows.size()), R.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) Rb.row(static_cast<Eigen::Index>(k)) = R.row(rows[k]);
  if (Rb.cols() == 0 || Rb.rows() == 0) return Mat(Rb.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(Rb);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  return Mat(qr.householderQ()).leftCols(rank);
}

SpMat to_sparse(const Mat& A) { return A.sparseView(0.0, 0.0); }

}  // namespace

PrimalInterfaceSystem::PrimalInterfaceSystem(const DecomposedProblem& problem,
                                             const std::vector<SubdomainOperators>& ops, Execution exec)
    : problem_(problem), ops_(ops), exec_(exec) {
  const auto n = problem.subdomains.size();
  for (std::size_t s = 0; s < n; ++s)
    for (int b : problem.subdomains[s].boundary) interface_dofs_.push_back(problem.trace.local_to_global[s][static_cast<std::size_t>(b)]);
  std::sort(interface_dofs_.begin(), interface_dofs_.end());
  interface_dofs_.erase(std::unique(interface_dofs_.begin(), interface_dofs_.end()), interface_dofs_.end());
  std::vector<int> position(static_cast<std::size_t>(problem.trace.global_size), -1);
  for (std::size_t i = 0; i < interface_dofs_.size(); ++i) position[static_cast<std::size_t>(interface_dofs_[i])] = static_cast<int>(i);

  maps_.resize(n);
  const auto m = static_cast<Eigen::Index>(interface_dofs_.size());
  Vec assembled_diag = Vec::Zero(m);
  std::vector<Vec> diag_bb(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& sub = problem.subdomains[s];
    for (int b : sub.boundary)
      maps_[s].push_back(position[static_cast<std::size_t>(problem.trace.local_to_global[s][static_cast<std::size_t>(b)])]);
    diag_bb[s] = gather(ops[s].diagonal, sub.boundary);
    add_extend(static_cast<int>(s), diag_bb[s], assembled_diag);
  }
  weights_.resize(n);
  for (std::size_t s = 0; s < n; ++s) weights_[s] = diag_bb[s].cwiseQuotient(restrict(static_cast<int>(s), assembled_diag));

  const std::vector<Vec> f = problem.raw_forces();
  rhs_ = Vec::Zero(m);
  for (std::size_t s = 0; s < n; ++s) add_extend(static_cast<int>(s), ops[s].condenser.condense(f[s]), rhs_);
}

Vec PrimalInterfaceSystem::restrict(int s, const Vec& x) const {
  const auto& map = maps_[static_cast<std::size_t>(s)];
  Vec out(static_cast<Eigen::Index>(map.size()));
  for (std::size_t k = 0; k < map.size(); ++k) out[static_cast<Eigen::Index>(k)] = x[map[k]];
  return out;
}

void PrimalInterfaceSystem::add_extend(int s, const Vec& local, Vec& x) const {
  scatter_add(local, maps_[static_cast<std::size_t>(s)], x);
}

Vec PrimalInterfaceSystem::apply_S(const Vec& x) const {
  const auto n = maps_.size();
  std::vector<Vec> local(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) { local[s] = ops_[s].schur * restrict(static_cast<int>(s), x); });
  Vec out = Vec::Zero(x.size());
  for (std::size_t s = 0; s < n; ++s) add_extend(static_cast<int>(s), local[s], out);
  return out;
}

double PrimalInterfaceSystem::partition_of_unity_defect() const {
  Vec sum = Vec::Zero(size());
  for (std::size_t s = 0; s < maps_.size(); ++s) add_extend(static_cast<int>(s), weights_[s], sum);
  return size() == 0 ? 0.0 : (sum.array() - 1.0).abs().maxCoeff();
}

std::vector<Vec> PrimalInterfaceSystem::recover(const Vec& x) const {
  const auto n = maps_.size();
  const std::vector<Vec> f = problem_.raw_forces();
  std::vector<Vec> u(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) {
    const auto& sub = problem_.subdomains[s];
    const Vec ub = restrict(static_cast<int>(s), x);
    Vec us = Vec::Zero(sub.size());
    scatter_add(ub, sub.boundary, us);
    scatter_add(ops_[s].condenser.interior_solution(f[s], ub), sub.internal, us);
    u[s] = std::move(us);
  });
  return u;
}

Mat PrimalInterfaceSystem::assemble_dense_S() const {
  Mat S(size(), size());
  for (int j = 0; j < size(); ++j) S.col(j) = apply_S(Vec::Unit(size(), j));
  return S;
}

CoarseBalancer::CoarseBalancer(const PrimalInterfaceSystem& system, const DecomposedProblem& problem) {
  std::vector<Vec> columns;
  for (int s = 0; s < problem.num_subdomains(); ++s) {
    const auto& sub = problem.subdomains[static_cast<std::size_t>(s)];
    if (!sub.floating()) continue;
    const Mat Rb = boundary_kernel(sub.R, sub.boundary);
    for (Eigen::Index k = 0; k < Rb.cols(); ++k) {
      Vec z = Vec::Zero(system.size());
      system.add_extend(s, system.weights(s).cwiseProduct(Rb.col(k)), z);
      columns.push_back(std::move(z));
    }
  }
  Z_.resize(system.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) Z_.col(static_cast<Eigen::Index>(k)) = columns[k];
  SZ_.resize(Z_.rows(), Z_.cols());
  for (Eigen::Index k = 0; k < Z_.cols(); ++k) SZ_.col(k) = system.apply_S(Z_.col(k));
  if (trivial()) return;
  Mat E = Z_.transpose() * SZ_;
  E = 0.5 * (E + E.transpose());
  coarse_.compute(E);
  const Vec diag = coarse_.matrixL().toDenseMatrix().diagonal();
  if (coarse_.info() != Eigen::Success || diag.minCoeff() <= 1e-7 * diag.maxCoeff())
    throw ConfigError("singular BDD coarse matrix (duplicated rigid modes)");
}

Vec CoarseBalancer::start(const Vec& b) const {
  if (trivial()) return Vec::Zero(b.size());
  return Z_ * coarse_.solve(Z_.transpose() * b);
}

Vec CoarseBalancer::project(const Vec& x) const {
  if (trivial()) return x;
  return x - Z_ * coarse_.solve(SZ_.transpose() * x);
}

Vec CoarseBalancer::project_transpose(const Vec& r) const {
  if (trivial()) return r;
  return r - SZ_ * coarse_.solve(Z_.transpose() * r);
}

double CoarseBalancer::balance_defect(const Vec& r, double reference_norm) const {
  if (trivial()) return 0.0;
  const double scale = Z_.norm() * reference_norm;
  const double defect = (Z_.transpose() * r).norm();
  return scale > 0.0 ? defect / scale : defect;
}

NeumannNeumann::NeumannNeumann(const PrimalInterfaceSystem& system, const DecomposedProblem& problem,
                               const std::vector<SubdomainOperators>& ops, Execution exec)
    : system_(system), exec_(exec), local_(problem.subdomains.size()) {
  for_each_subdomain(exec_, local_.size(), [&](std::size_t s) {
    const auto& sub = problem.subdomains[s];
    local_[s] = GeneralizedInverse(to_sparse(ops[s].schur), boundary_kernel(sub.R, sub.boundary));
  });
}

Vec NeumannNeumann::apply(const Vec& r) const {
  const auto n = local_.size();
  std::vector<Vec> local(n);
  for_each_subdomain(exec_, n, [&](std::size_t s) {
    const int si = static_cast<int>(s);
    const Vec& D = system_.weights(si);
    local[s] = D.cwiseProduct(local_[s].apply_pseudo(D.cwiseProduct(system_.restrict(si, r))));
  });
  Vec out = Vec::Zero(r.size());
  for (std::size_t s = 0; s < n; ++s) system_.add_extend(static_cast<int>(s), local[s], out);
  return out;
}

BddResult solve_bdd(const DecomposedProblem& problem, const BddOptions& options) {
  const auto ops = build_subdomain_operators(problem, options.execution);
  return solve_bdd(problem, ops, options);
}

BddResult solve_bdd(const DecomposedProblem& problem, const std::vector<SubdomainOperators>& ops,
                    const BddOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const auto start = std::chrono::steady_clock::now();
  const PrimalInterfaceSystem system(problem, ops, options.execution);
  const CoarseBalancer balancer(system, problem);
  const NeumannNeumann neumann(system, problem, ops, options.execution);

  BddResult result;
  const double b_norm = system.rhs().norm();
  auto global_residual = [&](const Vec& x) {
    return relative_global_residual(problem, weighted_average(problem.trace, system.recover(x)));
  };

  double last_global = 0.0;
  int last_global_iter = -1;
  ConvergenceFunctional functional;
  if (options.stop_on_global_residual) {
    functional = [&](const PcgState& st) {
      last_global = global_residual(st.x);
      last_global_iter = st.iteration;
      return last_global;
    };
  }
  IterateObserver observer = [&](const PcgState& st, double) {
    if (last_global_iter != st.iteration) {
      last_global = global_residual(st.x);
      last_global_iter = st.iteration;
    }
    result.max_balance_defect = std::max(result.max_balance_defect, balancer.balance_defect(st.residual, b_norm));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.entries.push_back({st.iteration, st.projected_residual.norm(), last_global, secs});
  };

  PcgOperators pcg_ops;
  pcg_ops.apply = [&](const Vec& x) { return system.apply_S(x); };
  pcg_ops.precondition = [&](const Vec& r) { return neumann.apply(r); };
  pcg_ops.project = [&](const Vec& x) { return balancer.project(x); };
  pcg_ops.project_transpose = [&](const Vec& r) { return balancer.project_transpose(r); };

  PcgSettings settings;
  settings.tolerance = options.epsilon;
  settings.max_iterations = options.max_iterations;
  settings.keep_directions = options.keep_directions;
  PcgResult solved = pcg(pcg_ops, system.rhs(), balancer.start(system.rhs()), settings, functional, observer);

  result.interface_solution = std::move(solved.x);
  result.krylov = std::move(solved.report);
  result.converged = result.krylov.termination == Termination::converged;
  result.u = system.recover(result.interface_solution);
  result.u_global = weighted_average(problem.trace, result.u);
  return result;
}

}  // namespace fetilab
