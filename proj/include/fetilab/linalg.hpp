#pragma once

#include "fetilab/common.hpp"

#include <memory>
#include <span>
#include <vector>

namespace fetilab {

/// Sparse LDL^T with AMD fill-reducing ordering for definite matrices.
/// Throws NumericalError when a pivot is not clearly positive.
class Factorization {
 public:
  Factorization() = default;
  explicit Factorization(const SpMat& A);

  Vec solve(const Vec& b) const;
  Mat solve(const Mat& B) const;
  int size() const { return size_; }
  /// Diagonal of D in A = P^T L D L^T P.
  Vec pivots() const;

 private:
  using Solver = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;
  std::shared_ptr<const Solver> solver_;
  int size_ = 0;
};

/// Generalized inverse of a symmetric positive semi-definite K whose kernel is
/// spanned by R. One dof per kernel vector is fixed (the pivots of a
/// column-pivoted QR of R^T) and the remaining block is factorized.
class GeneralizedInverse {
 public:
  GeneralizedInverse() = default;
  GeneralizedInverse(const SpMat& K, const Mat& R);

  /// Solution of the reduced system with zeros at the fixed dofs. Satisfies
  /// K x = b whenever R^T b = 0.
  Vec apply(const Vec& b) const;
  /// Moore-Penrose form (I - R R^T) apply((I - R R^T) b); symmetric and
  /// orthogonal to the kernel.
  Vec apply_pseudo(const Vec& b) const;

  const std::vector<int>& fixed_dofs() const { return fixed_; }
  const Mat& kernel() const { return basis_; }
  int size() const { return n_; }
  int kernel_dim() const { return static_cast<int>(basis_.cols()); }

 private:
  Vec project_out_kernel(const Vec& b) const;

  int n_ = 0;
  Mat basis_;  // orthonormal kernel basis
  std::vector<int> fixed_;
  std::vector<int> kept_;
  Factorization reduced_;
};

/// Rows/cols selection of a sparse matrix.
SpMat submatrix(const SpMat& A, std::span<const int> rows, std::span<const int> cols);

/// Static condensation of K onto its boundary dofs through a factorization
/// of the internal block.
class InteriorCondenser {
 public:
  InteriorCondenser() = default;
  /// Throws NumericalError if K_ii is singular.
  InteriorCondenser(const SpMat& K, std::vector<int> boundary, std::vector<int> internal);

  /// Dense S = K_bb - K_bi K_ii^-1 K_ib.
  Mat schur() const;
  /// f*_b = f_b - K_bi K_ii^-1 f_i, f given on all local dofs.
  Vec condense(const Vec& f) const;
  /// u_i = K_ii^-1 (f_i - K_ib u_b).
  Vec interior_solution(const Vec& f, const Vec& u_b) const;
  /// K_bi K_ii^-1 f_i.
  Vec interior_load_correction(const Vec& f) const;

  const std::vector<int>& boundary() const { return boundary_; }
  const std::vector<int>& internal() const { return internal_; }
  const SpMat& boundary_block() const { return Kbb_; }

 private:
  std::vector<int> boundary_;
  std::vector<int> internal_;
  SpMat Kbb_, Kbi_, Kib_;
  Factorization Kii_;
};

Mat schur_complement(const SpMat& K, std::span<const int> boundary);
Vec condense_force(const SpMat& K, const Vec& f, std::span<const int> boundary);

/// Moore-Penrose inverse of a small symmetric PSD matrix by eigen
/// decomposition; eigenvalues below 1e-12 * max are dropped.
/// Throws NumericalError for non-symmetric input.
Mat small_pinv(const Mat& M);

/// Gather v at the given indices.
Vec gather(const Vec& v, std::span<const int> idx);
/// out[idx[k]] += v[k]
void scatter_add(const Vec& v, std::span<const int> idx, Vec& out);

}  // namespace fetilab
