#pragma once

#include "fetilab/common.hpp"
#include "fetilab/local_operators.hpp"
#include "fetilab/mesh.hpp"
#include "fetilab/problem.hpp"

#include <string>
#include <vector>

namespace fetilab {

/// Block-diagonal (B A B^T)^+ where A is diagonal per subdomain. Multipliers
/// attached to the same global dof form one block; blocks are inverted with
/// small_pinv so fully-redundant maps are handled.
class JumpBlockInverse {
 public:
  JumpBlockInverse() = default;
  JumpBlockInverse(const JumpMap& jump, const std::vector<Vec>& weights);

  Vec apply(const Vec& lambda) const;
  Mat dense() const;
  int size() const { return size_; }

 private:
  struct Block {
    std::vector<int> multipliers;
    Mat inverse;
  };
  std::vector<Block> blocks_;
  int size_ = 0;
};

/// Scaled jump B~ = (B A B^T)^+ B A with diagonal A given per subdomain.
class ScaledJump {
 public:
  ScaledJump() = default;
  ScaledJump(const JumpMap& jump, std::vector<Vec> weights);

  /// B~ applied to per-subdomain local vectors.
  Vec apply(const std::vector<Vec>& local) const;
  /// B~(s)^T lambda for subdomain s, given mu = (B A B^T)^+ lambda.
  Vec transpose_local(int s, const Vec& mu, int local_size) const;
  Vec block_inverse(const Vec& lambda) const { return inverse_.apply(lambda); }
  const JumpMap& jump() const { return jump_; }
  const Vec& weights(int s) const { return weights_[static_cast<std::size_t>(s)]; }

 private:
  JumpMap jump_;
  std::vector<Vec> weights_;
  JumpBlockInverse inverse_;
};

enum class SplitKind { raw, classical, condensed };

std::string to_string(SplitKind kind);

struct SplitForces {
  std::vector<Vec> forces;
  SplitKind provenance = SplitKind::raw;
};

/// f~ = diag(K) L (L^T diag(K) L)^-1 L^T f.
SplitForces split_classical(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                            const TraceMap& trace);

/// f~ = f - B^T (B diag(K)^-1 B^T)^+ B diag(K)^-1 f.
SplitForces split_via_jump(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                           const JumpMap& jump);

/// Splits the statically condensed forces with diag(K_bb) weights on the
/// boundary and returns the non-condensed representation: internal entries
/// of f are kept, boundary entries become f~*_b + K_bi K_ii^-1 f_i.
SplitForces split_condensed(const std::vector<Vec>& f, const std::vector<SubdomainSystem>& subs,
                            const std::vector<SubdomainOperators>& ops, const TraceMap& trace);

/// Dispatch on kind; raw returns f unchanged.
SplitForces split_forces(SplitKind kind, const DecomposedProblem& problem,
                         const std::vector<SubdomainOperators>& ops);

/// max |A L (L^T A L)^-1 L^T + B^T (B A^-1 B^T)^+ B A^-1 - I| for dense
/// stacked operators.
double complementarity_check(const Mat& A, const Mat& B, const Mat& L);

}  // namespace fetilab
