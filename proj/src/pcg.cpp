#include "fetilab/pcg.hpp"

#include <cmath>
#include <limits>

namespace fetilab {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_iterations:
      return "max_iterations";
    case Termination::breakdown:
      return "breakdown";
    case Termination::stagnation:
      return "stagnation";
  }
  return "unknown";
}

double KrylovReport::conjugacy_defect() const {
  double worst = 0.0;
  const std::size_t n = search_directions.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ni = std::sqrt(std::abs(search_directions[i].dot(operator_directions[i])));
    for (std::size_t j = 0; j < i; ++j) {
      const double nj = std::sqrt(std::abs(search_directions[j].dot(operator_directions[j])));
      if (ni == 0.0 || nj == 0.0) continue;
      worst = std::max(worst, std::abs(search_directions[i].dot(operator_directions[j])) / (ni * nj));
    }
  }
  return worst;
}

namespace {

Vec apply_or_identity(const LinearMap& map, const Vec& v) { return map ? map(v) : v; }

}  // namespace

PcgResult pcg(const PcgOperators& ops, const Vec& rhs, const Vec& x0, const PcgSettings& settings,
              const ConvergenceFunctional& functional, const IterateObserver& observer) {
  PcgResult out;
  KrylovReport& rep = out.report;
  Vec& x = out.x;
  x = x0;
  Vec r = rhs - ops.apply(x);

  std::vector<Vec> P, AP;
  std::vector<double> pAp;
  double w0 = -1.0;
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0;
  Vec best_x = x;

  for (int k = 0;; ++k) {
    const Vec w = apply_or_identity(ops.project_transpose, r);
    const double wn = w.norm();
    if (w0 < 0.0) w0 = wn;
    rep.residual_norms.push_back(wn);
    const PcgState state{k, x, r, w};
    const double value = functional ? functional(state) : (w0 > 0.0 ? wn / w0 : 0.0);
    rep.functional.push_back(value);
    rep.iterations = k;
    if (observer) observer(state, value);

    if (!std::isfinite(value) || !std::isfinite(wn)) {
      rep.termination = Termination::breakdown;
      break;
    }
    if (value <= settings.tolerance || wn == 0.0) {
      rep.termination = Termination::converged;
      break;
    }
    if (value < best) {
      best = value;
      best_k = k;
      if (k > 0) best_x = x;
    }
    if (settings.stagnation_window > 0 && k - best_k >= settings.stagnation_window) {
      rep.termination = Termination::stagnation;
      break;
    }
    if (k >= settings.max_iterations) {
      rep.termination = Termination::max_iterations;
      break;
    }

    const Vec z = apply_or_identity(ops.project, apply_or_identity(ops.precondition, w));
    rep.preconditioned_norms.push_back(std::sqrt(std::abs(w.dot(z))));
    Vec p = z;
    if (settings.reorthogonalize) {
      for (std::size_t j = 0; j < P.size(); ++j) p -= (AP[j].dot(p) / pAp[j]) * P[j];
    } else if (!P.empty()) {
      // Plain CG recurrence: only the last direction.
      p -= (AP.back().dot(p) / pAp.back()) * P.back();
    }
    if (ops.constrain) p = ops.constrain(p);
    const Vec Ap = ops.apply(p);
    const double curvature = p.dot(Ap);
    if (!std::isfinite(curvature) || curvature == 0.0) {
      rep.termination = Termination::breakdown;
      break;
    }
    if (curvature < 0.0) rep.negative_curvature = true;
    const double step = p.dot(r) / curvature;
    if (!std::isfinite(step)) {
      rep.termination = Termination::breakdown;
      break;
    }
    x += step * p;
    r -= step * Ap;
    ++rep.directions;

    if (settings.reorthogonalize) {
      P.push_back(p);
      AP.push_back(Ap);
      pAp.push_back(curvature);
    } else {
      P.assign(1, p);
      AP.assign(1, Ap);
      pAp.assign(1, curvature);
    }
    if (settings.keep_directions) {
      rep.search_directions.push_back(p);
      rep.operator_directions.push_back(Ap);
    }
  }
  if (rep.termination != Termination::converged && best_k < rep.iterations) x = best_x;
  return out;
}

}  // namespace fetilab
