#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fetilab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Invalid user input: grid, material, enum value or config key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical precondition failed (singular block, inconsistent kernel, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selects the serial reference loop or the OpenMP loop for per-subdomain
/// kernels. Both paths write to disjoint per-subdomain buffers and reduce in
/// subdomain order, so their results are bitwise identical.
enum class Execution { serial, parallel };

/// Runs fn(i) for i in [0, n). Exceptions thrown inside the parallel loop are
/// captured and the first one is rethrown after the loop joins.
template <class Fn>
void for_each_subdomain(Execution exec, std::size_t n, Fn&& fn) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// One row per iteration of an interface solver.
struct ResidualEntry {
  int iteration = 0;
  double interface_residual = 0.0;
  double global_residual = 0.0;
  double seconds = 0.0;
};

struct ResidualHistory {
  std::vector<ResidualEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  const ResidualEntry& initial() const { return entries.front(); }
  const ResidualEntry& final() const { return entries.back(); }
};

}  // namespace fetilab
