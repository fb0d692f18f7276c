#pragma once

// Gradient projection with a (cyclic) Barzilai-Borwein steplength and an exact
// linesearch along the projected segment. The same iteration serves the
// convex relaxations (solve_convex) and the nonconvex problem f_tau
// (descend_nonconvex); for a quadratic the segment search is exact in both
// cases, so the objective never increases.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "cqb/bounds.hpp"
#include "cqb/qp.hpp"

namespace cqb {

namespace detail {

/// sum_i clamp(x_i - theta, lower_i, upper_i)
inline double shifted_clip_sum(const Vector& x, const FeasibleSet& set, double theta) {
  return (x.array() - theta).max(set.lower.array()).min(set.upper.array()).sum();
}

/// Root of the nonincreasing piecewise-linear map theta -> shifted_clip_sum
/// at the given target, located exactly from its sorted breakpoints.
inline double solve_shift(const Vector& x, const FeasibleSet& set, double target) {
  const int n = static_cast<int>(x.size());
  std::vector<double> breaks;
  breaks.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    breaks.push_back(x(i) - set.upper(i));
    breaks.push_back(x(i) - set.lower(i));
  }
  std::sort(breaks.begin(), breaks.end());
  // Invariant: phi(breaks[lo]) >= target >= phi(breaks[hi]).
  std::size_t lo = 0, hi = breaks.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (shifted_clip_sum(x, set, breaks[mid]) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double phi_lo = shifted_clip_sum(x, set, breaks[lo]);
  const double phi_hi = shifted_clip_sum(x, set, breaks[hi]);
  if (phi_lo <= target) return breaks[lo];
  if (phi_hi >= target) return breaks[hi];
  const double t = (phi_lo - target) / (phi_lo - phi_hi);
  return breaks[lo] + t * (breaks[hi] - breaks[lo]);
}

}  // namespace detail

/// Euclidean projection onto the box intersected with the budget slab.
inline Vector project(const Vector& x, const FeasibleSet& set) {
  if (x.size() != set.dimension()) throw Error("projection: dimension mismatch");
  if (!set.nonempty()) throw InfeasibleError("projection onto an empty set");
  Vector clip = x.cwiseMax(set.lower).cwiseMin(set.upper);
  if (x.size() == 0) return clip;
  const double s = clip.sum();
  // Sums within rounding of the budget count as on it (0.2 + 0.7 + 0.1 < 1).
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * clip.cwiseAbs().sum();
  double target;
  if (s > set.budget_hi + slack) {
    target = set.budget_hi;
  } else if (s < set.budget_lo - slack) {
    target = set.budget_lo;
  } else {
    return clip;
  }
  const double theta = detail::solve_shift(x, set, target);
  Vector p = (x.array() - theta).max(set.lower.array()).min(set.upper.array()).matrix();
  // For large |x| the subtraction x_i - theta cancels; put the lost mass
  // back on the coordinates strictly inside their bounds.
  std::vector<int> inner;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) > set.lower(i) && p(i) < set.upper(i)) inner.push_back(i);
  }
  if (!inner.empty()) {
    const double share = (target - p.sum()) / static_cast<double>(inner.size());
    for (int i : inner) p(i) = std::clamp(p(i) + share, set.lower(i), set.upper(i));
  }
  return p;
}

struct SolveOptions {
  double tol = 1e-4;
  int max_iter = 10000;
  double alpha_min = 1e-8;
  double alpha_max = 1e8;
  /// A BB step is reused for this many iterations unless the linesearch cuts it.
  /// Plain BB with an exact linesearch crawls on nearly singular relaxations.
  int bb_cycle = 3;
  /// Called with (iteration, iterate) after every accepted step.
  std::function<void(int, const Vector&)> observer;
};

struct SolveReport {
  Vector x;
  double value = 0.0;
  double residual = 0.0;  // |P(x - g) - x|
  int iterations = 0;
  bool converged = false;
};

/// Objective with value, gradient and the t^2 coefficient of t -> f(x + t d).
template <class F>
concept QuadraticObjective = requires(const F& f, const Vector& x) {
  { f.objective(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
  { f.curvature(x) } -> std::convertible_to<double>;
};

inline double stationarity_residual(const Vector& x, const Vector& g, const FeasibleSet& set) {
  return (project(x - g, set) - x).norm();
}

template <QuadraticObjective F>
SolveReport gradient_projection(const F& f, const FeasibleSet& set, Vector x,
                                const SolveOptions& opts = {}) {
  if (!set.contains(x, 1e-7)) throw InfeasibleError("starting point is not feasible");
  x = project(x, set);
  SolveReport report;
  Vector g = f.gradient(x);
  double value = f.objective(x);
  const double gmax = g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  double alpha = gmax > 0.0 ? 1.0 / gmax : 1.0;
  alpha = std::clamp(alpha, opts.alpha_min, opts.alpha_max);

  int k = 0;
  for (;; ++k) {
    report.residual = stationarity_residual(x, g, set);
    if (report.residual <= opts.tol) {
      report.converged = true;
      break;
    }
    if (k >= opts.max_iter) break;
    const Vector d = project(x - alpha * g, set) - x;
    const double slope = g.dot(d);
    const double curv = f.curvature(d);
    double t = 1.0;
    if (curv > 0.0) t = std::clamp(-slope / (2.0 * curv), 0.0, 1.0);
    Vector x_next = x + t * d;
    Vector g_next = f.gradient(x_next);
    if (t < 1.0 || (k + 1) % std::max(1, opts.bb_cycle) == 0) {
      const Vector step = x_next - x;
      const double sy = step.dot(g_next - g);
      alpha = sy > 0.0 ? std::clamp(step.squaredNorm() / sy, opts.alpha_min, opts.alpha_max)
                       : opts.alpha_max;
    }
    value = f.objective(x_next);
    x = std::move(x_next);
    g = std::move(g_next);
    if (opts.observer) opts.observer(k + 1, x);
  }
  report.x = std::move(x);
  report.value = value;
  report.iterations = k;
  return report;
}

struct ConvexSolveResult {
  SolveReport report;
  double bound = 0.0;  // certified lower bound on min f_L over the feasible set
};

inline ConvexSolveResult solve_convex(const ConvexRelaxation& rel, const Vector& x0,
                                      const SolveOptions& opts = {}) {
  ConvexSolveResult out;
  out.report = gradient_projection(rel, rel.feasible_set(), x0, opts);
  out.bound = certified_lower_bound(rel, out.report.x);
  return out;
}

template <StructuredQp P>
SolveReport descend_nonconvex(const P& problem, const Vector& x0, const SolveOptions& opts = {}) {
  return gradient_projection(problem, problem.feasible_set(), x0, opts);
}

}  // namespace cqb
