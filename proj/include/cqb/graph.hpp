#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cqb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the solver.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised when a budget or box admits no feasible point.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Undirected weighted graph without self loops, stored as a dense symmetric
/// weight matrix. Weights may be negative.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  explicit WeightedGraph(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() != weights_.cols()) {
      throw Error("weight matrix must be square");
    }
    const auto n = weights_.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights_(i, i) != 0.0) {
        throw Error("self loop at vertex " + std::to_string(i + 1));
      }
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (weights_(i, j) != weights_(j, i)) {
          throw Error("weight matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")");
        }
        if (!std::isfinite(weights_(i, j))) {
          throw Error("non-finite edge weight");
        }
      }
    }
  }

  int size() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

  /// Number of unordered pairs with nonzero weight.
  int edge_count() const {
    int m = 0;
    for (int i = 0; i < size(); ++i) {
      for (int j = i + 1; j < size(); ++j) {
        if (weights_(i, j) != 0.0) ++m;
      }
    }
    return m;
  }

  /// Percentage of nonzero off-diagonal entries.
  double density_percent() const {
    const int n = size();
    if (n < 2) return 0.0;
    return 100.0 * 2.0 * edge_count() / (static_cast<double>(n) * (n - 1));
  }

  bool integral() const {
    return (weights_.array() == weights_.array().round()).all();
  }

  /// Total weight of the edges incident to each vertex.
  Vector incident_weight() const { return weights_.rowwise().sum(); }

 private:
  Matrix weights_;
};

/// Size bounds l <= |V1| <= u on one side of the partition.
struct PartitionSpec {
  int lower = 0;
  int upper = 0;

  static PartitionSpec bisection(int n) { return {n / 2, (n + 1) / 2}; }

  void validate(int n) const {
    if (lower < 0 || lower > upper || upper > n) {
      throw Error("partition bounds must satisfy 0 <= l <= u <= n (got l=" +
                  std::to_string(lower) + ", u=" + std::to_string(upper) +
                  ", n=" + std::to_string(n) + ")");
    }
  }
};

/// d_jj = max(0, max_i a_ij). Satisfies d_ii + d_jj >= 2 a_ij and d >= 0.
inline Vector build_diagonal_shift(const WeightedGraph& g) {
  const int n = g.size();
  Vector d = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) d(j) = std::max(d(j), g.weight(i, j));
  }
  return d;
}

inline bool is_binary(std::span<const double> x) {
  for (double v : x) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

inline bool is_binary(const Vector& x) {
  return is_binary(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

/// Sum of the weights of edges whose endpoints lie on different sides.
inline double cut_weight(const WeightedGraph& g, const Vector& side) {
  if (side.size() != g.size()) throw Error("side vector has wrong dimension");
  if (!is_binary(side)) throw Error("cut_weight requires a binary side vector");
  double total = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (side(i) != side(j)) total += g.weight(i, j);
    }
  }
  return total;
}

}  // namespace cqb
