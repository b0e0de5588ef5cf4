#include "fetilab/splitting.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fetilab {

JumpBlockInverse::JumpBlockInverse(const JumpMap& jump, const std::vector<Vec>& weights)
    : size_(jump.num_multipliers) {
  struct Touch {
    int subdomain;
    int local_dof;
    int sign;
  };
  std::vector<std::vector<Touch>> touches(static_cast<std::size_t>(size_));
  for (int s = 0; s < jump.num_subdomains(); ++s)
    for (const auto& e : jump.entries[static_cast<std::size_t>(s)])
      touches[static_cast<std::size_t>(e.multiplier)].push_back({s, e.local_dof, e.sign});

  // Multipliers of one global dof are contiguous.
  for (int m = 0; m < size_;) {
    const int g = jump.multiplier_global_dof[static_cast<std::size_t>(m)];
    Block block;
    while (m < size_ && jump.multiplier_global_dof[static_cast<std::size_t>(m)] == g) block.multipliers.push_back(m++);
    const auto nb = static_cast<Eigen::Index>(block.multipliers.size());
    Mat M = Mat::Zero(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j)
        for (const auto& ti : touches[static_cast<std::size_t>(block.multipliers[static_cast<std::size_t>(i)])])
          for (const auto& tj : touches[static_cast<std::size_t>(block.multipliers[static_cast<std::size_t>(j)])])
            if (ti.subdomain == tj.subdomain && ti.local_dof == tj.local_dof)
              M(i, j) += ti.sign * tj.sign * weights[static_cast<std::size_t>(ti.subdomain)][ti.local_dof];
    block.inverse = nb == 1 ? Mat::Constant(1, 1, M(0, 0) > 0.0 ? 1.0 / M(0, 0) : 0.0) : small_pinv(M);
    blocks_.push_back(std::move(block));
  }
}

Vec JumpBlockInverse::apply(const Vec& lambda) const {
  Vec out = Vec::Zero(size_);
  for (const auto& b : blocks_) {
    out(b.multipliers) = b.inverse * lambda(b.multipliers);
  }
  return out;
}

Mat JumpBlockInverse::dense() const {
  Mat D = Mat::Zero(size_, size_);
  for (const auto& b : blocks_) {
    for (std::size_t i = 0; i < b.multipliers.size(); ++i)
      for (std::size_t j = 0; j < b.multipliers.size(); ++j)
        D(b.multipliers[i], b.multipliers[j]) = b.inverse(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return D;
}

ScaledJump::ScaledJump(const JumpMap& jump, std::vector<Vec> weights)
    : jump_(jump), weights_(std::move(weights)), inverse_(jump_, weights_) {}

Vec ScaledJump::apply(const std::vector<Vec>& local) const {
  Vec lambda = Vec::Zero(jump_.num_multipliers);
  for (int s = 0; s < jump_.num_subdomains(); ++s)
    jump_.add_apply(s, weights_[static_cast<std::size_t>(s)].cwiseProduct(local[static_cast<std::size_t>(s)]), lambda);
  return inverse_.apply(lambda);
}

Vec ScaledJump::transpose_local(int s, const Vec& mu, int local_size) const {
  Vec v = Vec::Zero(local_size);
  jump_.add_transpose(s, mu, v);
  return weights_[static_cast<std::size_t>(s)].cwiseProduct(v);
}

std::string to_string(SplitKind kind) {
  switch (kind) {
    case SplitKind::raw:
      return "none";
    case SplitKind::classical:
      return "classical";
    case SplitKind::condensed:
      return "condensed";
  }
  return "unknown";
}

SplitForces split_classical(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                            const TraceMap& trace) {
  std::vector<Vec> diag;
  for (const auto& sub : subs) diag.push_back(sub.K.diagonal());
  const Vec assembled_diag = trace.assemble(diag);
  const Vec assembled_force = trace.assemble(f);
  SplitForces out{{}, SplitKind::classical};
  for (std::size_t s = 0; s < subs.size(); ++s) {
    const auto& map = trace.local_to_global[s];
    Vec fs(static_cast<Eigen::Index>(map.size()));
    for (std::size_t l = 0; l < map.size(); ++l) {
      const auto i = static_cast<Eigen::Index>(l);
      fs[i] = diag[s][i] * assembled_force[map[l]] / assembled_diag[map[l]];
    }
    out.forces.push_back(std::move(fs));
  }
  return out;
}

SplitForces split_via_jump(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                           const JumpMap& jump) {
  std::vector<Vec> inv_diag;
  for (const auto& sub : subs) inv_diag.push_back(sub.K.diagonal().cwiseInverse());
  const ScaledJump scaled(jump, inv_diag);
  const Vec mu = scaled.apply(f);
  SplitForces out{{}, SplitKind::classical};
  for (std::size_t s = 0; s < subs.size(); ++s) {
    Vec fs = f[s];
    jump.add_transpose(static_cast<int>(s), mu, fs, -1.0);
    out.forces.push_back(std::move(fs));
  }
  return out;
}

SplitForces split_condensed(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                            const std::vector<SubdomainOperators>& ops, const TraceMap& trace) {
  const std::size_t n = subs.size();
  std::vector<Vec> condensed(n), diag_bb(n);
  Vec assembled_force = Vec::Zero(trace.global_size);
  Vec assembled_diag = Vec::Zero(trace.global_size);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& b = subs[s].boundary;
    condensed[s] = ops[s].condenser.condense(f[s]);
    diag_bb[s] = gather(subs[s].K.diagonal(), b);
    for (std::size_t k = 0; k < b.size(); ++k) {
      const int g = trace.local_to_global[s][static_cast<std::size_t>(b[k])];
      assembled_force[g] += condensed[s][static_cast<Eigen::Index>(k)];
      assembled_diag[g] += diag_bb[s][static_cast<Eigen::Index>(k)];
    }
  }
  SplitForces out{{}, SplitKind::condensed};
  for (std::size_t s = 0; s < n; ++s) {
    const auto& b = subs[s].boundary;
    Vec fs = f[s];
    for (std::size_t k = 0; k < b.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const int g = trace.local_to_global[s][static_cast<std::size_t>(b[k])];
      const double split = diag_bb[s][i] * assembled_force[g] / assembled_diag[g];
      fs[b[k]] += split - condensed[s][i];  // f_b + (f~*_b - f*_b)
    }
    out.forces.push_back(std::move(fs));
  }
  return out;
}

SplitForces split_forces(SplitKind kind, const DecomposedProblem& problem,
                         const std::vector<SubdomainOperators>& ops) {
  const std::vector<Vec> f = problem.raw_forces();
  switch (kind) {
    case SplitKind::raw:
      return {f, SplitKind::raw};
    case SplitKind::classical:
      return split_classical(f, problem.subdomains, problem.trace);
    case SplitKind::condensed:
      return split_condensed(f, problem.subdomains, ops, problem.trace);
  }
  return {f, SplitKind::raw};
}

namespace {

/// Orthonormal basis of range(M); `rank` columns.
Mat range_basis(const Mat& M, Eigen::Index rank) {
  const Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(rank);
}

Eigen::Index numerical_rank(const Mat& M) {
  const Eigen::JacobiSVD<Mat> svd(M);
  const Vec sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  return (sv.array() > 1e-10 * sv[0]).count();
}

}  // namespace

double complementarity_check(const Mat& A, const Mat& B, const Mat& L) {
  // Both terms are A^1/2 Pi A^-1/2 with Pi an orthogonal projector:
  // onto range(A^1/2 L) and onto range(A^-1/2 B^T).
  const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (A + A.transpose()));
  if (eig.eigenvalues().size() > 0 && !(eig.eigenvalues().minCoeff() > 0.0))
    throw NumericalError("complementarity_check: A is not positive definite");
  const Mat root = eig.operatorSqrt();
  const Mat inv_root = eig.operatorInverseSqrt();
  const Mat U = range_basis(root * L, numerical_rank(L));
  const Mat V = range_basis(inv_root * B.transpose(), numerical_rank(B));
  const Mat primal = root * (U * U.transpose()) * inv_root;
  const Mat dual = root * (V * V.transpose()) * inv_root;
  const Mat I = Mat::Identity(A.rows(), A.cols());
  return (primal + dual - I).cwiseAbs().maxCoeff();
}

}  // namespace fetilab
