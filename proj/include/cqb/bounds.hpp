#pragma once

// Convex lower bounds for f(x) = k + c^T x - x^T Q x over the unit box with a
// budget constraint.
//
// A diagonal shift Lambda with Lambda - M PSD splits f into the convex part
// f(x) + x^T Lambda x and the concave part -x^T Lambda x. Over the unit box
// the best affine underestimate of -x^T Lambda x is -lambda^T x, which gives
//
//   f_L(x) = f(x) + x^T Lambda x - lambda^T x <= f(x).
//
// Two shifts are provided: the scalar sigma = max(0, lambda_max(M)) and the
// minimum-trace diagonal shift from the semidefinite program
//   min sum(lambda)  s.t.  Diag(lambda) - M PSD.
// Every shift carries a Cholesky certificate: Diag(lambda) - M - margin*I was
// factorized successfully, so f_L is convex and the linearization bound in
// certified_lower_bound is valid for any feasible iterate.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "cqb/qp.hpp"

namespace cqb {

enum class ShiftKind { Scalar, Diagonal };

struct DcShift {
  ShiftKind kind = ShiftKind::Diagonal;
  Vector lambda;                   // per-coordinate shift; sigma * 1 for Scalar
  double sigma = 0.0;              // Scalar only
  double certificate_margin = 0.0; // Diag(lambda) - M - margin*I is positive definite
  bool certified = false;
  bool converged = true;           // inner SDP solver reached its gap tolerance

  double total() const { return lambda.sum(); }
};

/// Margin used by every PSD certificate for a matrix of this size.
inline double certificate_margin(const Matrix& m) {
  const double scale = m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-9 * std::max(1.0, scale);
}

/// True when s - margin*I admits a Cholesky factorization.
inline bool certify_psd(const Matrix& s, double margin) {
  if (s.size() == 0) return true;
  Matrix shifted = s;
  shifted.diagonal().array() -= margin;
  Eigen::LLT<Matrix> llt(shifted);
  return llt.info() == Eigen::Success;
}

inline double max_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// sigma >= max(0, lambda_max(M)) with sigma*I - M certified PSD.
inline DcShift sigma_shift(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  const double margin = certificate_margin(m);
  const double top = std::max(0.0, max_eigenvalue(m));
  double sigma = top * (1.0 + 1e-6) + 2.0 * margin;
  double bump = std::max(margin, 1e-6 * top);
  const Matrix identity = Matrix::Identity(n, n);
  bool ok = certify_psd(sigma * identity - m, margin);
  for (int attempt = 0; !ok && attempt < 60; ++attempt) {
    sigma += bump;
    bump *= 2.0;
    ok = certify_psd(sigma * identity - m, margin);
  }
  if (!ok) {
    // Gershgorin: every eigenvalue lies below max_i (m_ii + sum_j |m_ij|).
    double gersh = 0.0;
    for (int i = 0; i < n; ++i) {
      gersh = std::max(gersh, m(i, i) + m.row(i).cwiseAbs().sum() - std::abs(m(i, i)));
    }
    sigma = std::max(sigma, gersh + 2.0 * margin);
    ok = certify_psd(sigma * identity - m, margin);
  }
  DcShift shift;
  shift.kind = ShiftKind::Scalar;
  shift.sigma = sigma;
  shift.lambda = Vector::Constant(n, sigma);
  shift.certificate_margin = margin;
  shift.certified = ok;
  return shift;
}

struct SdpOptions {
  double relative_gap = 1e-9;
  int max_iterations = 100;     // barrier parameter updates
  int max_newton_steps = 50;    // per barrier parameter
};

namespace detail {

/// log det of the matrix factored by llt.
inline double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Dual log-barrier method for
///   min 1^T y  s.t.  Z = Diag(y) - M PSD,
/// minimizing 1^T y - mu log det Z by damped Newton steps for a decreasing
/// sequence of mu. Z stays positive definite (every trial point is Cholesky
/// factored), so y is a valid shift whenever the loop stops. The rescaled
/// matrix X = D Z^{-1} D with diag(X) = 1 is feasible for the dual problem
///   max <M, X>  s.t.  diag(X) = 1, X PSD,
/// and 1^T y - <M, X> certifies the gap.
inline Vector sdp_dual_barrier(const Matrix& m, const SdpOptions& opts, bool& converged) {
  const int n = static_cast<int>(m.rows());
  const Matrix identity = Matrix::Identity(n, n);
  // Strictly diagonally dominant start.
  Vector y = 1.1 * m.cwiseAbs().rowwise().sum() + Vector::Ones(n);
  Eigen::LLT<Matrix> llt(Matrix(y.asDiagonal()) - m);
  double mu = y.sum() / n;
  converged = false;
  auto inverse = [&](const Eigen::LLT<Matrix>& f) {
    Matrix zi = f.solve(identity);
    return Matrix(0.5 * (zi + zi.transpose()));
  };
  for (int outer = 0; outer < opts.max_iterations; ++outer) {
    for (int step = 0; step < opts.max_newton_steps; ++step) {
      const Matrix zi = inverse(llt);
      const Vector grad = Vector::Ones(n) - mu * zi.diagonal();
      const Matrix hess = mu * zi.cwiseProduct(zi);
      const Vector dy = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(dy);
      if (!dy.allFinite() || !(decrement > 1e-12 * std::max(1.0, std::abs(y.sum())))) break;
      const double phi = y.sum() - mu * log_det(llt);
      bool moved = false;
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        const Vector trial = y + t * dy;
        Eigen::LLT<Matrix> f(Matrix(trial.asDiagonal()) - m);
        if (f.info() != Eigen::Success) continue;
        if (trial.sum() - mu * log_det(f) <= phi - 0.25 * t * decrement) {
          y = trial;
          llt = f;
          moved = true;
          break;
        }
      }
      if (!moved || decrement < 1e-3) break;
    }
    const Matrix zi = inverse(llt);
    const Vector scale = zi.diagonal().cwiseSqrt().cwiseInverse();
    const Matrix x = scale.asDiagonal() * zi * scale.asDiagonal();
    const double gap = y.sum() - (m.array() * x.array()).sum();
    if (gap <= opts.relative_gap * std::max(1.0, std::abs(y.sum()))) {
      converged = true;
      break;
    }
    mu /= 5.0;
  }
  return y;
}

}  // namespace detail

/// Minimum-trace diagonal shift: lambda >= 0, Diag(lambda) - M certified PSD,
/// sum(lambda) <= n * sigma.
inline DcShift sdp_shift(const Matrix& m, const SdpOptions& opts = {}) {
  const int n = static_cast<int>(m.rows());
  const DcShift scalar = sigma_shift(m);
  DcShift shift;
  shift.kind = ShiftKind::Diagonal;
  shift.certificate_margin = scalar.certificate_margin;
  if (n == 0) {
    shift.lambda = Vector(0);
    shift.certified = true;
    return shift;
  }
  bool converged = false;
  Vector lambda = detail::sdp_dual_barrier(m, opts, converged);
  lambda = lambda.cwiseMax(0.0);

  const double margin = shift.certificate_margin;
  auto gap_matrix = [&](const Vector& l) { return Matrix(Matrix(l.asDiagonal()) - m); };
  bool ok = lambda.allFinite() && certify_psd(gap_matrix(lambda), margin);
  for (int attempt = 0; !ok && attempt < 30 && lambda.allFinite(); ++attempt) {
    const double low = min_eigenvalue(gap_matrix(lambda));
    lambda.array() += std::max(0.0, -low) + 2.0 * margin * (1 << std::min(attempt, 20));
    ok = certify_psd(gap_matrix(lambda), margin);
  }
  if (!ok || !lambda.allFinite() || lambda.sum() > scalar.total()) {
    // sigma * 1 is always feasible for the semidefinite program.
    lambda = scalar.lambda;
    ok = scalar.certified;
  }
  shift.lambda = lambda;
  shift.certified = ok;
  shift.converged = converged;
  return shift;
}

/// Restriction of a shift to a subset of coordinates. A principal submatrix of
/// a PSD matrix is PSD, so the certificate carries over.
inline DcShift restrict_shift(const DcShift& shift, const std::vector<int>& indices) {
  DcShift out = shift;
  out.lambda.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) out.lambda(k) = shift.lambda(indices[k]);
  return out;
}

struct Sphere {
  Vector center;
  double radius = 0.0;
};

/// Smallest sphere containing {p <= x <= q}.
inline Sphere sphere_for_box(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw Error("box bounds have different dimensions");
  if (((q - p).array() < 0.0).any()) throw Error("box lower bound exceeds upper bound");
  return {0.5 * (p + q), 0.5 * (p - q).norm()};
}

/// Sphere containing Lambda^{1/2} {0 <= x <= 1, 1^T x = b}: the box sphere cut
/// by the hyperplane y^T lambda^{-1/2} = b.
inline Sphere sphere_for_box_hyperplane(const Vector& lambda, double b) {
  if ((lambda.array() <= 0.0).any()) throw Error("lambda must be strictly positive");
  const double n = static_cast<double>(lambda.size());
  const double inv_sum = lambda.cwiseInverse().sum();
  const double offset = b - 0.5 * n;
  Sphere s;
  s.center = 0.5 * lambda.cwiseSqrt() + (offset / inv_sum) * lambda.cwiseSqrt().cwiseInverse();
  double r2 = 0.25 * lambda.sum() - offset * offset / inv_sum;
  const double slack = 1e-12 * std::max(1.0, lambda.sum());
  if (r2 < -slack) throw InfeasibleError("hyperplane does not meet the box");
  s.radius = std::sqrt(std::max(0.0, r2));
  return s;
}

/// l(x) = slope^T x + offset.
struct AffineFunction {
  Vector slope;
  double offset = 0.0;

  double operator()(const Vector& x) const { return slope.dot(x) + offset; }
};

/// Best affine underestimate of -x^T Lambda x over a set whose image under
/// Lambda^{1/2} lies in the given sphere: -2 c^T Lambda^{1/2} x + |c|^2 - r^2.
/// Coordinates with lambda_i = 0 get zero slope.
inline AffineFunction affine_from_sphere(const Vector& lambda, const Sphere& sphere) {
  AffineFunction l;
  l.slope = -2.0 * sphere.center.cwiseProduct(lambda.cwiseMax(0.0).cwiseSqrt());
  l.offset = sphere.center.squaredNorm() - sphere.radius * sphere.radius;
  return l;
}

/// Underestimate of -x^T Diag(shift) x over the unit box, optionally cut by
/// 1^T x = b. Both cases reduce to -lambda^T x.
inline AffineFunction affine_underestimate(const DcShift& shift, const FeasibleSet& set,
                                           std::optional<double> exact_budget = std::nullopt) {
  if (shift.lambda.size() != set.dimension()) throw Error("shift and set dimensions differ");
  if (!set.lower.isZero() || !(set.upper.array() == 1.0).all()) {
    throw Error("affine_underestimate expects the unit box");
  }
  if (exact_budget && (*exact_budget < 0.0 || *exact_budget > set.dimension())) {
    throw InfeasibleError("budget outside [0, n]");
  }
  return {-shift.lambda.cwiseMax(0.0), 0.0};
}

/// f_L(x) = f_tau(x) + x^T Lambda_F x + l(x), stored as
/// constant + linear^T x + x^T hessian_half x.
struct ConvexRelaxation {
  ReducedQp reduced;
  Vector shift;                  // lambda restricted to the free coordinates
  AffineFunction underestimate;
  Matrix hessian_half;           // Diag(lambda_F) - M_FF
  Vector linear;
  double constant = 0.0;
  double certificate_margin = 0.0;
  bool certified = false;

  int dimension() const { return reduced.dimension(); }
  double objective(const Vector& x) const { return constant + linear.dot(x) + x.dot(hessian_half * x); }
  Vector gradient(const Vector& x) const { return linear + 2.0 * (hessian_half * x); }
  double curvature(const Vector& d) const { return d.dot(hessian_half * d); }
  FeasibleSet feasible_set() const { return reduced.feasible_set(); }
};

namespace detail {

inline ConvexRelaxation assemble_relaxation(const ReducedQp& reduced, const DcShift& local) {
  ConvexRelaxation rel;
  rel.reduced = reduced;
  rel.shift = local.lambda;
  rel.underestimate = affine_underestimate(local, reduced.feasible_set());
  rel.hessian_half = Matrix(local.lambda.asDiagonal()) - reduced.block;
  rel.linear = reduced.linear + rel.underestimate.slope;
  rel.constant = reduced.constant + rel.underestimate.offset;
  rel.certificate_margin = local.certificate_margin;
  rel.certified = local.certified;
  return rel;
}

}  // namespace detail

/// Relaxation at a node using a shift certified for the full matrix.
inline ConvexRelaxation build_relaxation(const ReducedQp& reduced, const DcShift& full_shift) {
  if (full_shift.lambda.size() != reduced.fixed.size()) {
    throw Error("shift must be computed for the full problem");
  }
  return detail::assemble_relaxation(reduced, restrict_shift(full_shift, reduced.free));
}

/// Relaxation using a shift computed directly for M_FF.
inline ConvexRelaxation build_relaxation_local(const ReducedQp& reduced, const DcShift& local_shift) {
  if (local_shift.lambda.size() != reduced.dimension()) {
    throw Error("local shift must match the free dimension");
  }
  return detail::assemble_relaxation(reduced, local_shift);
}

/// Exact minimizer of c^T y over {0 <= y <= 1, lo <= 1^T y <= hi}.
inline Vector greedy_linear_min(const Vector& c, int lo, int hi) {
  const int n = static_cast<int>(c.size());
  if (lo > n || hi < 0 || lo > hi) throw InfeasibleError("budget admits no point of the unit box");
  const int floor_count = std::max(lo, 0);
  const int cap = std::min(hi, n);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return c(a) < c(b); });
  Vector y = Vector::Zero(n);
  int taken = 0;
  for (int k = 0; k < n && taken < cap; ++k) {
    if (c(idx[k]) < 0.0 || taken < floor_count) {
      y(idx[k]) = 1.0;
      ++taken;
    } else {
      break;
    }
  }
  return y;
}

/// Lower bound on min f_L over the feasible set from any feasible point, using
/// f_L(y) >= f_L(x) + grad f_L(x)^T (y - x) minimized exactly.
inline double certified_lower_bound(const ConvexRelaxation& rel, const Vector& x) {
  const FeasibleSet set = rel.feasible_set();
  if (!set.contains(x, 1e-7)) throw InfeasibleError("certified_lower_bound needs a feasible point");
  const Vector g = rel.gradient(x);
  const Vector y = greedy_linear_min(g, static_cast<int>(std::lround(set.budget_lo)),
                                     static_cast<int>(std::lround(set.budget_hi)));
  return rel.objective(x) + g.dot(y - x);
}

}  // namespace cqb
