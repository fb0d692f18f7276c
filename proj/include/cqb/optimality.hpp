#pragma once

// First-order, local and strict-local optimality tests for
//   min k + c^T x - x^T Q x  s.t.  0 <= x <= 1, l <= 1^T x <= u,
// where Q_ii + Q_jj >= 2 Q_ij and Q_ii >= 0 (Q plays the role of A + D, so
// d_ii = Q_ii and a_ij = Q_ij off the diagonal).
//
// With mu = grad f(x) + lambda 1, the KKT conditions read: mu_i > 0 forces
// x_i = 0, mu_i < 0 forces x_i = 1, lambda > 0 forces 1^T x = u and
// lambda < 0 forces 1^T x = l. A KKT point is a local minimizer iff
//   P2: Q_ii + Q_jj = 2 Q_ij for all distinct i, j in F,
//   P3: the same for i, j drawn from two different sets among U0, L0, F,
//   P4 (l < u only): lambda = g_i = 0 implies Q_ii = 0 when the budget is
//       inactive, or x_i > 0 at 1^T x = u, or x_i < 1 at 1^T x = l.
// Whenever P2-P4 fail at a KKT point, e_i - e_j or e_i (with a sign) is a
// direction of strict decrease.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cqb/qp.hpp"

namespace cqb {

struct OptimalityTolerances {
  double membership = 1e-7;  // on x and 1^T x
  double multiplier = 1e-6;  // on mu, lambda and the pair identities; scaled by max(1, |Q|_inf)
};

enum class Condition { None, P1, P2, P3, P4a, P4b, P4c };

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::None: return "none";
    case Condition::P1: return "P1";
    case Condition::P2: return "P2";
    case Condition::P3: return "P3";
    case Condition::P4a: return "P4a";
    case Condition::P4b: return "P4b";
    case Condition::P4c: return "P4c";
  }
  return "?";
}

struct Witness {
  Condition condition = Condition::None;
  int i = -1;
  int j = -1;
  double measure = 0.0;  // size of the violation
};

struct Multipliers {
  double lambda = 0.0;
  Vector mu;
  bool interval_empty = false;  // no lambda fits the binary sign pattern
  double gap = 0.0;             // width of the violation when interval_empty
};

struct KktAssessment {
  double lambda = 0.0;
  Vector mu;
  std::vector<int> lower_set;   // L: x_i = 0
  std::vector<int> upper_set;   // U: x_i = 1
  std::vector<int> free_set;    // F: 0 < x_i < 1
  std::vector<int> upper_zero;  // U0: i in U with mu_i = 0
  std::vector<int> lower_zero;  // L0: i in L with mu_i = 0
  std::vector<int> zero_gradient;  // Z: grad f(x)_i = 0
  bool p1 = false;
  bool p2 = false;
  bool p3 = false;
  bool p4 = true;  // vacuous when l = u
  bool local_min = false;
  Witness witness;
};

struct StrictnessFlags {
  bool c1 = false;
  bool c2 = false;
  bool c3 = false;
  bool strict = false;
};

struct DescentDirection {
  Vector direction;
  double max_step = 0.0;  // largest a with x + a d feasible
  Condition source = Condition::None;
};

namespace detail {

template <StructuredQp P>
double multiplier_scale(const P& p, const OptimalityTolerances& tol) {
  const Matrix& q = p.coupling();
  const double norm = q.size() == 0 ? 0.0 : q.cwiseAbs().rowwise().sum().maxCoeff();
  return tol.multiplier * std::max(1.0, norm);
}

struct BudgetState {
  bool at_lower = false;
  bool at_upper = false;
};

template <StructuredQp P>
BudgetState budget_state(const P& p, const Vector& x, const OptimalityTolerances& tol) {
  const double s = x.sum();
  return {std::abs(s - p.budget_lower()) <= tol.membership,
          std::abs(s - p.budget_upper()) <= tol.membership};
}

inline bool at_zero(double v, double tol) { return std::abs(v) <= tol; }
inline bool at_one(double v, double tol) { return std::abs(v - 1.0) <= tol; }

}  // namespace detail

/// Chooses lambda to minimise the KKT violation at x, then mu = grad f + lambda 1.
template <StructuredQp P>
Multipliers multipliers(const P& p, const Vector& x, const OptimalityTolerances& tol = {}) {
  if (!p.feasible_set().contains(x, tol.membership)) {
    throw InfeasibleError("multipliers need a feasible point");
  }
  const Vector g = p.gradient(x);
  const auto budget = detail::budget_state(p, x, tol);
  Multipliers out;
  if (budget.at_lower || budget.at_upper) {
    std::vector<int> free;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < x.size(); ++i) {
      if (detail::at_zero(x(i), tol.membership)) {
        lo = std::max(lo, -g(i));  // mu_i >= 0
      } else if (detail::at_one(x(i), tol.membership)) {
        hi = std::min(hi, -g(i));  // mu_i <= 0
      } else {
        free.push_back(i);
      }
    }
    // Sign restriction from the active side: lambda > 0 needs 1^T x = u.
    if (!budget.at_lower) lo = std::max(lo, 0.0);
    if (!budget.at_upper) hi = std::min(hi, 0.0);
    if (!free.empty()) {
      double mean = 0.0;
      for (int i : free) mean -= g(i);
      mean /= static_cast<double>(free.size());
      if (!budget.at_lower) mean = std::max(mean, 0.0);
      if (!budget.at_upper) mean = std::min(mean, 0.0);
      out.lambda = mean;
    } else if (lo > hi) {
      out.interval_empty = true;
      out.gap = lo - hi;
      out.lambda = 0.5 * (lo + hi);
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
      out.lambda = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      out.lambda = lo + std::max(1.0, std::abs(lo));
    } else if (std::isfinite(hi)) {
      out.lambda = hi - std::max(1.0, std::abs(hi));
    }
  }
  out.mu = g.array() + out.lambda;
  return out;
}

template <StructuredQp P>
bool check_first_order(const P& p, const Vector& x, double lambda, const Vector& mu,
                       const OptimalityTolerances& tol = {}) {
  if (!p.feasible_set().contains(x, tol.membership)) return false;
  const double mtol = detail::multiplier_scale(p, tol);
  for (int i = 0; i < x.size(); ++i) {
    if (mu(i) > mtol && !detail::at_zero(x(i), tol.membership)) return false;
    if (mu(i) < -mtol && !detail::at_one(x(i), tol.membership)) return false;
  }
  const auto budget = detail::budget_state(p, x, tol);
  if (lambda > mtol && !budget.at_upper) return false;
  if (lambda < -mtol && !budget.at_lower) return false;
  return true;
}

template <StructuredQp P>
KktAssessment check_local_min(const P& p, const Vector& x, const OptimalityTolerances& tol = {}) {
  KktAssessment a;
  const int n = p.dimension();
  if (!p.feasible_set().contains(x, tol.membership)) {
    a.witness = {Condition::P1, -1, -1, 0.0};
    return a;
  }
  const Matrix& q = p.coupling();
  const double mtol = detail::multiplier_scale(p, tol);
  const Multipliers mult = multipliers(p, x, tol);
  a.lambda = mult.lambda;
  a.mu = mult.mu;
  const Vector g = p.gradient(x);
  for (int i = 0; i < n; ++i) {
    if (detail::at_zero(x(i), tol.membership)) {
      a.lower_set.push_back(i);
      if (std::abs(a.mu(i)) <= mtol) a.lower_zero.push_back(i);
    } else if (detail::at_one(x(i), tol.membership)) {
      a.upper_set.push_back(i);
      if (std::abs(a.mu(i)) <= mtol) a.upper_zero.push_back(i);
    } else {
      a.free_set.push_back(i);
    }
    if (std::abs(g(i)) <= mtol) a.zero_gradient.push_back(i);
  }

  a.p1 = !mult.interval_empty && check_first_order(p, x, a.lambda, a.mu, tol);
  if (!a.p1) a.witness = {Condition::P1, -1, -1, mult.gap};

  auto pair_gap = [&](int i, int j) { return q(i, i) + q(j, j) - 2.0 * q(i, j); };
  auto record = [&](Condition c, int i, int j, double m) {
    if (a.witness.condition == Condition::None) a.witness = {c, i, j, m};
  };

  a.p2 = true;
  for (std::size_t s = 0; s < a.free_set.size(); ++s) {
    for (std::size_t t = s + 1; t < a.free_set.size(); ++t) {
      const int i = a.free_set[s], j = a.free_set[t];
      const double gap = pair_gap(i, j);
      if (gap > mtol) {
        a.p2 = false;
        record(Condition::P2, i, j, gap);
      }
    }
  }

  a.p3 = true;
  const std::vector<int>* groups[3] = {&a.upper_zero, &a.lower_zero, &a.free_set};
  for (int ga = 0; ga < 3; ++ga) {
    for (int gb = ga + 1; gb < 3; ++gb) {
      for (int i : *groups[ga]) {
        for (int j : *groups[gb]) {
          const double gap = pair_gap(i, j);
          if (gap > mtol) {
            a.p3 = false;
            record(Condition::P3, i, j, gap);
          }
        }
      }
    }
  }

  a.p4 = true;
  if (p.budget_lower() < p.budget_upper() && std::abs(a.lambda) <= mtol) {
    const auto budget = detail::budget_state(p, x, tol);
    const bool interior = !budget.at_lower && !budget.at_upper;
    for (int i : a.zero_gradient) {
      if (q(i, i) <= mtol) continue;
      Condition c = Condition::None;
      if (interior) {
        c = Condition::P4a;
      } else if (budget.at_upper && !detail::at_zero(x(i), tol.membership)) {
        c = Condition::P4b;
      } else if (budget.at_lower && !detail::at_one(x(i), tol.membership)) {
        c = Condition::P4c;
      }
      if (c != Condition::None) {
        a.p4 = false;
        record(c, i, -1, q(i, i));
      }
    }
  }

  a.local_min = a.p1 && a.p2 && a.p3 && a.p4;
  return a;
}

/// Strictness test for a point already known to be a local minimizer.
template <StructuredQp P>
StrictnessFlags check_strict(const P& p, const Vector& x, const OptimalityTolerances& tol = {}) {
  StrictnessFlags f;
  const int n = p.dimension();
  const double mtol = detail::multiplier_scale(p, tol);
  const Vector g = p.gradient(x);

  f.c1 = true;
  double min_lower = std::numeric_limits<double>::infinity();
  double max_upper = -std::numeric_limits<double>::infinity();
  std::vector<int> zero;
  for (int i = 0; i < n; ++i) {
    if (detail::at_zero(x(i), tol.membership)) {
      min_lower = std::min(min_lower, g(i));
    } else if (detail::at_one(x(i), tol.membership)) {
      max_upper = std::max(max_upper, g(i));
    } else {
      f.c1 = false;
    }
    if (std::abs(g(i)) <= mtol) zero.push_back(i);
  }
  f.c2 = !(std::isfinite(min_lower) && std::isfinite(max_upper)) || min_lower - max_upper > mtol;

  f.c3 = true;
  if (p.budget_lower() < p.budget_upper() && !zero.empty() && check_first_order(p, x, 0.0, g, tol)) {
    const auto budget = detail::budget_state(p, x, tol);
    const bool all_zero = std::all_of(zero.begin(), zero.end(),
                                      [&](int i) { return detail::at_zero(x(i), tol.membership); });
    const bool all_one = std::all_of(zero.begin(), zero.end(),
                                     [&](int i) { return detail::at_one(x(i), tol.membership); });
    f.c3 = (budget.at_upper && all_zero) || (budget.at_lower && all_one);
  }
  f.strict = f.c1 && f.c2 && f.c3;
  return f;
}

/// Descent direction at a KKT point that violates P2, P3 or P4.
template <StructuredQp P>
std::optional<DescentDirection> descent_direction(const P& p, const Vector& x,
                                                  const KktAssessment& a,
                                                  const OptimalityTolerances& tol = {}) {
  if (!a.p1 || a.local_min) return std::nullopt;
  const int n = p.dimension();
  const double xt = tol.membership;
  const Witness& w = a.witness;
  DescentDirection out;
  out.source = w.condition;
  out.direction = Vector::Zero(n);
  switch (w.condition) {
    case Condition::P2:
    case Condition::P3: {
      const int i = w.i, j = w.j;
      // e_i - e_j needs room to raise x_i and lower x_j; otherwise flip.
      if (x(i) < 1.0 - xt && x(j) > xt) {
        out.direction(i) = 1.0;
        out.direction(j) = -1.0;
        out.max_step = std::min(1.0 - x(i), x(j));
      } else {
        out.direction(i) = -1.0;
        out.direction(j) = 1.0;
        out.max_step = std::min(x(i), 1.0 - x(j));
      }
      break;
    }
    case Condition::P4a:
    case Condition::P4b:
    case Condition::P4c: {
      const int i = w.i;
      const double s = x.sum();
      const double up_room = std::min(1.0 - x(i), p.budget_upper() - s);
      const double down_room = std::min(x(i), s - p.budget_lower());
      const bool raise = w.condition == Condition::P4c ||
                         (w.condition == Condition::P4a && up_room >= down_room);
      out.direction(i) = raise ? 1.0 : -1.0;
      out.max_step = raise ? up_room : down_room;
      break;
    }
    default:
      return std::nullopt;
  }
  if (out.max_step <= 0.0) return std::nullopt;
  return out;
}

}  // namespace cqb
