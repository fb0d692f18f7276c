#pragma once

// Moves a feasible point to a binary feasible point without increasing f.
//
// Phase 1 moves one fractional coordinate along e_i, against the sign of its
// partial derivative, until it reaches a face of the box or 1^T x becomes an
// integer. Along e_i the objective is f + a g_i - a^2 Q_ii with Q_ii >= 0, so
// the move never increases f.
//
// Phase 2 (1^T x integral, hence at least two fractional coordinates) moves
// along e_i - e_j, where f changes by a (g_i - g_j) + a^2 (2 Q_ij - Q_ii - Q_jj)
// and the quadratic term is nonpositive. Each move makes one more coordinate
// binary.

#include <cmath>
#include <vector>

#include "cqb/qp.hpp"

namespace cqb {

struct RoundingResult {
  Vector y;
  std::vector<double> values;  // f before the first move, then after each move
};

struct Partition {
  std::vector<int> side0;
  std::vector<int> side1;
};

namespace detail {

constexpr double kBinaryTol = 1e-9;

inline bool fractional(double v) { return v != 0.0 && v != 1.0; }

inline void snap(double& v) {
  if (std::abs(v) <= kBinaryTol) v = 0.0;
  if (std::abs(v - 1.0) <= kBinaryTol) v = 1.0;
}

inline bool integral_sum(double s) { return std::abs(s - std::round(s)) <= kBinaryTol; }

}  // namespace detail

template <StructuredQp P>
RoundingResult round_to_binary(const P& problem, const Vector& x) {
  const FeasibleSet set = problem.feasible_set();
  if (!set.contains(x, 1e-7)) throw InfeasibleError("round_to_binary needs a feasible point");
  const Matrix& q = problem.coupling();
  const int n = problem.dimension();

  RoundingResult out;
  Vector y = x.cwiseMax(0.0).cwiseMin(1.0);
  for (int i = 0; i < n; ++i) detail::snap(y(i));
  Vector g = problem.gradient(y);
  out.values.push_back(problem.objective(y));

  auto first_fractional = [&](int from) {
    for (int i = from; i < n; ++i) {
      if (detail::fractional(y(i))) return i;
    }
    return -1;
  };
  auto record = [&] { out.values.push_back(problem.objective(y)); };

  // Phase 1: make the budget integral.
  for (double s = y.sum(); !detail::integral_sum(s); s = y.sum()) {
    const int i = first_fractional(0);
    if (i < 0) break;
    double step;
    if (g(i) < 0.0) {
      const double to_face = 1.0 - y(i);
      const double to_integer = std::ceil(s) - s;
      step = std::min(to_face, to_integer);
      y(i) = to_face <= to_integer ? 1.0 : y(i) + step;
    } else {
      const double to_face = y(i);
      const double to_integer = s - std::floor(s);
      step = -std::min(to_face, to_integer);
      y(i) = to_face <= to_integer ? 0.0 : y(i) + step;
    }
    detail::snap(y(i));
    g -= 2.0 * step * q.col(i);
    record();
  }

  // Phase 2: paired moves at constant budget.
  for (;;) {
    const int i = first_fractional(0);
    if (i < 0) break;
    const int j = first_fractional(i + 1);
    if (j < 0) {
      // Only floating-point residue can leave a single fractional entry here.
      y(i) = std::round(y(i));
      g = problem.gradient(y);
      record();
      break;
    }
    double step;
    if (g(i) - g(j) < 0.0) {
      step = std::min(1.0 - y(i), y(j));
      if (1.0 - y(i) <= y(j)) {
        y(j) -= 1.0 - y(i);
        y(i) = 1.0;
      } else {
        y(i) += y(j);
        y(j) = 0.0;
      }
    } else {
      step = -std::min(y(i), 1.0 - y(j));
      if (y(i) <= 1.0 - y(j)) {
        y(j) += y(i);
        y(i) = 0.0;
      } else {
        y(i) -= 1.0 - y(j);
        y(j) = 1.0;
      }
    }
    detail::snap(y(i));
    detail::snap(y(j));
    g -= 2.0 * step * (q.col(i) - q.col(j));
    record();
  }
  out.y = std::move(y);
  return out;
}

inline Partition partition_from_binary(const Vector& y) {
  if (!is_binary(y)) throw Error("partition_from_binary requires a binary vector");
  Partition p;
  for (int i = 0; i < y.size(); ++i) (y(i) == 1.0 ? p.side1 : p.side0).push_back(i);
  return p;
}

}  // namespace cqb
