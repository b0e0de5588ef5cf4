#include "fetilab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fetilab {

Factorization::Factorization(const SpMat& A) : size_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw NumericalError("factorization needs a square matrix");
  if (size_ == 0) return;
  auto solver = std::make_shared<Solver>();
  solver->compute(A);
  if (solver->info() != Eigen::Success) throw NumericalError("sparse factorization failed");
  const Vec d = solver->vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-12 * scale))
    throw NumericalError("matrix is not positive definite (pivot ratio " + std::to_string(d.minCoeff() / scale) + ")");
  solver_ = std::move(solver);
}

Vec Factorization::solve(const Vec& b) const {
  if (size_ == 0) return Vec(0);
  return solver_->solve(b);
}

Mat Factorization::solve(const Mat& B) const {
  if (size_ == 0) return Mat(0, B.cols());
  return solver_->solve(B);
}

Vec Factorization::pivots() const {
  if (size_ == 0) return Vec(0);
  return solver_->vectorD();
}

SpMat submatrix(const SpMat& A, std::span<const int> rows, std::span<const int> cols) {
  std::vector<int> rmap(static_cast<std::size_t>(A.rows()), -1), cmap(static_cast<std::size_t>(A.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) cmap[static_cast<std::size_t>(cols[j])] = static_cast<int>(j);
  std::vector<Triplet> trips;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = rmap[static_cast<std::size_t>(it.row())];
      const int c = cmap[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SpMat S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

Vec gather(const Vec& v, std::span<const int> idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
  return out;
}

void scatter_add(const Vec& v, std::span<const int> idx, Vec& out) {
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += v[static_cast<Eigen::Index>(k)];
}

GeneralizedInverse::GeneralizedInverse(const SpMat& K, const Mat& R) : n_(static_cast<int>(K.rows())) {
  if (R.rows() != K.rows()) throw NumericalError("kernel basis has wrong row count");
  const auto m = R.cols();
  if (m > 0) {
    Eigen::HouseholderQR<Mat> qr(R);
    basis_ = qr.householderQ() * Mat::Identity(R.rows(), m);
    Eigen::ColPivHouseholderQR<Mat> pivoted(R.transpose());
    const auto& perm = pivoted.colsPermutation().indices();
    for (Eigen::Index k = 0; k < m; ++k) fixed_.push_back(perm[k]);
    std::sort(fixed_.begin(), fixed_.end());
  } else {
    basis_ = Mat(K.rows(), 0);
  }
  for (int i = 0, f = 0; i < n_; ++i) {
    if (f < static_cast<int>(fixed_.size()) && fixed_[static_cast<std::size_t>(f)] == i) {
      ++f;
      continue;
    }
    kept_.push_back(i);
  }
  try {
    reduced_ = Factorization(submatrix(K, kept_, kept_));
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("inconsistent null space: reduced matrix not SPD (") + e.what() + ")");
  }
}

Vec GeneralizedInverse::apply(const Vec& b) const {
  Vec x = Vec::Zero(n_);
  if (kept_.empty()) return x;
  const Vec y = reduced_.solve(gather(b, kept_));
  for (std::size_t k = 0; k < kept_.size(); ++k) x[kept_[k]] = y[static_cast<Eigen::Index>(k)];
  return x;
}

Vec GeneralizedInverse::project_out_kernel(const Vec& b) const {
  if (basis_.cols() == 0) return b;
  return b - basis_ * (basis_.transpose() * b);
}

Vec GeneralizedInverse::apply_pseudo(const Vec& b) const {
  return project_out_kernel(apply(project_out_kernel(b)));
}

InteriorCondenser::InteriorCondenser(const SpMat& K, std::vector<int> boundary, std::vector<int> internal)
    : boundary_(std::move(boundary)), internal_(std::move(internal)) {
  Kbb_ = submatrix(K, boundary_, boundary_);
  Kbi_ = submatrix(K, boundary_, internal_);
  Kib_ = submatrix(K, internal_, boundary_);
  try {
    Kii_ = Factorization(submatrix(K, internal_, internal_));
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("singular internal block K_ii: ") + e.what());
  }
}

Mat InteriorCondenser::schur() const {
  Mat S = Mat(Kbb_);
  if (!internal_.empty() && !boundary_.empty()) {
    const Mat X = Kii_.solve(Mat(Kib_));
    S -= Kbi_ * X;
  }
  return 0.5 * (S + S.transpose());
}

Vec InteriorCondenser::interior_load_correction(const Vec& f) const {
  if (internal_.empty()) return Vec::Zero(static_cast<Eigen::Index>(boundary_.size()));
  return Kbi_ * Kii_.solve(gather(f, internal_));
}

Vec InteriorCondenser::condense(const Vec& f) const {
  return gather(f, boundary_) - interior_load_correction(f);
}

Vec InteriorCondenser::interior_solution(const Vec& f, const Vec& u_b) const {
  if (internal_.empty()) return Vec(0);
  return Kii_.solve(Vec(gather(f, internal_) - Kib_ * u_b));
}

namespace {

std::vector<int> complement(int n, std::span<const int> boundary) {
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  for (int b : boundary) mark[static_cast<std::size_t>(b)] = 1;
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!mark[static_cast<std::size_t>(i)]) rest.push_back(i);
  return rest;
}

}  // namespace

Mat schur_complement(const SpMat& K, std::span<const int> boundary) {
  const std::vector<int> b(boundary.begin(), boundary.end());
  return InteriorCondenser(K, b, complement(static_cast<int>(K.rows()), boundary)).schur();
}

Vec condense_force(const SpMat& K, const Vec& f, std::span<const int> boundary) {
  const std::vector<int> b(boundary.begin(), boundary.end());
  return InteriorCondenser(K, b, complement(static_cast<int>(K.rows()), boundary)).condense(f);
}

Mat small_pinv(const Mat& M) {
  if (M.rows() != M.cols()) throw NumericalError("pseudo-inverse needs a square matrix");
  if (M.size() == 0) return M;
  const double scale = M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    throw NumericalError("pseudo-inverse input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(M);
  const Vec& ev = eig.eigenvalues();
  const double cut = 1e-12 * ev.cwiseAbs().maxCoeff();
  Vec inv = Vec::Zero(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev[k] > cut) inv[k] = 1.0 / ev[k];
  const Mat& V = eig.eigenvectors();
  return V * inv.asDiagonal() * V.transpose();
}

}  // namespace fetilab
