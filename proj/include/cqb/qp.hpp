#pragma once

// The continuous quadratic program
//
//   minimize f(x) = (1 - x)^T M x,   M = A + D,
//   subject to 0 <= x <= 1,  l <= 1^T x <= u,
//
// whose binary feasible points are exactly the partitions with l <= |V1| <= u
// and whose value at such a point is the cut weight. Fixing a prefix of the
// branching order to binary values leaves a problem of the same shape in the
// remaining coordinates,
//
//   f_tau(x) = k + c^T x - x^T M_FF x,
//
// which is what ReducedQp stores.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cqb/graph.hpp"

namespace cqb {

/// {x : lower <= x <= upper, budget_lo <= 1^T x <= budget_hi}.
struct FeasibleSet {
  Vector lower;
  Vector upper;
  double budget_lo = 0.0;
  double budget_hi = 0.0;

  static FeasibleSet unit_box(int n, double lo, double hi) {
    return {Vector::Zero(n), Vector::Ones(n), lo, hi};
  }

  int dimension() const { return static_cast<int>(lower.size()); }

  bool nonempty() const {
    return (lower.array() <= upper.array()).all() && budget_lo <= budget_hi &&
           budget_lo <= upper.sum() && budget_hi >= lower.sum();
  }

  bool contains(const Vector& x, double tol = 1e-9) const {
    if (x.size() != lower.size()) return false;
    if (((x - lower).array() < -tol).any() || ((upper - x).array() < -tol).any()) return false;
    const double s = x.sum();
    return s >= budget_lo - tol && s <= budget_hi + tol;
  }
};

/// Any quadratic f(x) = k + c^T x - x^T Q x whose coupling matrix Q satisfies
/// Q_ii + Q_jj >= 2 Q_ij and Q_ii >= 0, together with its budget bounds.
template <class P>
concept StructuredQp = requires(const P& p, const Vector& x) {
  { p.dimension() } -> std::convertible_to<int>;
  { p.objective(x) } -> std::convertible_to<double>;
  { p.gradient(x) } -> std::convertible_to<Vector>;
  { p.curvature(x) } -> std::convertible_to<double>;
  { p.coupling() } -> std::convertible_to<const Matrix&>;
  { p.budget_lower() } -> std::convertible_to<int>;
  { p.budget_upper() } -> std::convertible_to<int>;
  { p.feasible_set() } -> std::convertible_to<FeasibleSet>;
};

class QpProblem {
 public:
  QpProblem(Matrix coupling, int lower, int upper)
      : coupling_(std::move(coupling)), lower_(lower), upper_(upper) {
    if (coupling_.rows() != coupling_.cols()) throw Error("QP matrix must be square");
    row_sums_ = coupling_.rowwise().sum();
  }

  int dimension() const { return static_cast<int>(coupling_.rows()); }
  const Matrix& coupling() const { return coupling_; }
  int budget_lower() const { return lower_; }
  int budget_upper() const { return upper_; }

  double objective(const Vector& x) const {
    check(x);
    return row_sums_.dot(x) - x.dot(coupling_ * x);
  }

  /// M 1 - 2 M x.
  Vector gradient(const Vector& x) const {
    check(x);
    return row_sums_ - 2.0 * (coupling_ * x);
  }

  /// Coefficient of t^2 in f(x + t d).
  double curvature(const Vector& d) const { return -d.dot(coupling_ * d); }

  FeasibleSet feasible_set() const {
    return FeasibleSet::unit_box(dimension(), lower_, upper_);
  }

 private:
  void check(const Vector& x) const {
    if (x.size() != coupling_.rows()) {
      throw Error("dimension mismatch: expected " + std::to_string(coupling_.rows()) + ", got " +
                  std::to_string(x.size()));
    }
  }

  Matrix coupling_;
  Vector row_sums_;
  int lower_;
  int upper_;
};

inline QpProblem make_qp(const WeightedGraph& g, const PartitionSpec& spec) {
  spec.validate(g.size());
  Matrix m = g.weights();
  m.diagonal() = build_diagonal_shift(g);
  return QpProblem(std::move(m), spec.lower, spec.upper);
}

inline double objective(const QpProblem& qp, const Vector& x) { return qp.objective(x); }
inline Vector gradient(const QpProblem& qp, const Vector& x) { return qp.gradient(x); }

/// Binary values (b_1, ..., b_i) assigned to the first i vertices of the
/// branching order.
struct SubproblemLabel {
  std::vector<std::uint8_t> bits;

  int depth() const { return static_cast<int>(bits.size()); }
  int ones() const { return static_cast<int>(std::count(bits.begin(), bits.end(), 1)); }

  SubproblemLabel child(std::uint8_t bit) const {
    SubproblemLabel c{bits};
    c.bits.push_back(bit);
    return c;
  }
};

/// The problem left after fixing a label, in the free coordinates only.
struct ReducedQp {
  std::vector<int> free;  // original indices of the free coordinates
  Matrix block;           // M_FF
  Vector linear;          // c_tau
  double constant = 0.0;  // k_tau
  int lower = 0;          // l_tau, may be negative
  int upper = 0;          // u_tau, may exceed |F|
  Vector fixed;           // full-length vector carrying the fixed values, 0 on F

  int dimension() const { return static_cast<int>(free.size()); }
  const Matrix& coupling() const { return block; }
  /// Budget bounds clipped to [0, |F|]; the clipped set is the same set.
  int budget_lower() const { return std::max(lower, 0); }
  int budget_upper() const { return std::min(upper, dimension()); }

  double objective(const Vector& x) const { return constant + linear.dot(x) - x.dot(block * x); }
  Vector gradient(const Vector& x) const { return linear - 2.0 * (block * x); }
  double curvature(const Vector& d) const { return -d.dot(block * d); }

  /// Unit box with the budget clipped to [0, |F|].
  FeasibleSet feasible_set() const {
    return FeasibleSet::unit_box(dimension(), budget_lower(), budget_upper());
  }

  /// Full-length point with the fixed values and x on the free coordinates.
  Vector expand(const Vector& x) const {
    Vector full = fixed;
    for (int k = 0; k < dimension(); ++k) full(free[k]) = x(k);
    return full;
  }

  /// Restriction of a full-length vector to the free coordinates.
  Vector restrict(const Vector& full) const {
    Vector x(dimension());
    for (int k = 0; k < dimension(); ++k) x(k) = full(free[k]);
    return x;
  }
};

/// False when the label fixes more than u ones, or leaves too few free
/// coordinates to reach l.
inline bool label_feasible(const QpProblem& qp, const SubproblemLabel& label) {
  const int ones = label.ones();
  const int free_count = qp.dimension() - label.depth();
  return qp.budget_upper() - ones >= 0 && qp.budget_lower() - ones <= free_count;
}

inline ReducedQp reduce(const QpProblem& qp, const SubproblemLabel& label,
                        const std::vector<int>& order) {
  const int n = qp.dimension();
  if (label.depth() > n) throw Error("label longer than the problem dimension");
  if (static_cast<int>(order.size()) != n) throw Error("order must be a permutation of the vertices");
  if (!label_feasible(qp, label)) throw InfeasibleError("label admits no feasible completion");

  const Matrix& m = qp.coupling();
  ReducedQp r;
  r.fixed = Vector::Zero(n);
  std::vector<bool> is_fixed(n, false);
  for (int j = 0; j < label.depth(); ++j) {
    r.fixed(order[j]) = label.bits[j];
    is_fixed[order[j]] = true;
  }
  for (int i = 0; i < n; ++i) {
    if (!is_fixed[i]) r.free.push_back(i);
  }
  const int nf = r.dimension();
  const Vector row_sums = m.rowwise().sum();
  const Vector mz = m * r.fixed;
  r.constant = row_sums.dot(r.fixed) - r.fixed.dot(mz);
  r.linear.resize(nf);
  r.block.resize(nf, nf);
  for (int a = 0; a < nf; ++a) {
    r.linear(a) = row_sums(r.free[a]) - 2.0 * mz(r.free[a]);
    for (int b = 0; b < nf; ++b) r.block(a, b) = m(r.free[a], r.free[b]);
  }
  r.lower = qp.budget_lower() - label.ones();
  r.upper = qp.budget_upper() - label.ones();
  return r;
}

/// The identity reduction (nothing fixed).
inline ReducedQp reduce(const QpProblem& qp) {
  std::vector<int> order(qp.dimension());
  std::iota(order.begin(), order.end(), 0);
  return reduce(qp, SubproblemLabel{}, order);
}

}  // namespace cqb
