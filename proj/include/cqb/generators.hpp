#pragma once

// Instance generators for the benchmark families: toroidal grids, planar
// grids, mixed (complete) grids, uniform random graphs and binary de Bruijn
// graphs.
//
// All randomness comes from Rng, a std::mt19937_64 engine (its output
// sequence is fixed by the C++ standard) combined with rejection sampling for
// bounded integers and 53-bit mantissa extraction for reals. The standard
// distribution classes are avoided on purpose: their output differs between
// standard library implementations.

#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "cqb/graph.hpp"

namespace cqb {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw Error("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return lo + static_cast<std::int64_t>(r % span);
  }

  /// Uniform real in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline void add_edge(Matrix& a, int i, int j, double w) {
  a(i, j) += w;
  a(j, i) += w;
}

inline void require_grid(int h, int k) {
  if (h < 2 || k < 2) {
    throw Error("grid dimensions must be at least 2x2 (got " + std::to_string(h) + "x" +
                std::to_string(k) + ")");
  }
}

}  // namespace detail

/// h x k torus: every vertex joined to its right and lower neighbour with
/// wrap-around, 2hk edges with integer weights in [1,10]. When h or k equals
/// 2 the two wrap edges between a pair coincide and their weights are summed.
inline WeightedGraph gen_toroidal(int h, int k, std::uint64_t seed) {
  detail::require_grid(h, k);
  Rng rng(seed);
  const int n = h * k;
  Matrix a = Matrix::Zero(n, n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < k; ++c) {
      const int v = r * k + c;
      detail::add_edge(a, v, r * k + (c + 1) % k, static_cast<double>(rng.uniform_int(1, 10)));
      detail::add_edge(a, v, ((r + 1) % h) * k + c, static_cast<double>(rng.uniform_int(1, 10)));
    }
  }
  return WeightedGraph(std::move(a));
}

/// h x k planar grid, 2hk - h - k edges with integer weights in [1,10].
inline WeightedGraph gen_planar(int h, int k, std::uint64_t seed) {
  detail::require_grid(h, k);
  Rng rng(seed);
  const int n = h * k;
  Matrix a = Matrix::Zero(n, n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < k; ++c) {
      const int v = r * k + c;
      if (c + 1 < k) detail::add_edge(a, v, v + 1, static_cast<double>(rng.uniform_int(1, 10)));
      if (r + 1 < h) detail::add_edge(a, v, v + k, static_cast<double>(rng.uniform_int(1, 10)));
    }
  }
  return WeightedGraph(std::move(a));
}

/// Complete graph on an h x k grid: grid edges weighted in [1,100], all other
/// pairs in [1,10]. Pairs are visited in lexicographic order (i < j).
inline WeightedGraph gen_mixed(int h, int k, std::uint64_t seed) {
  detail::require_grid(h, k);
  Rng rng(seed);
  const int n = h * k;
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool grid_edge = (j == i + 1 && i / k == j / k) || (j == i + k);
      const auto w = grid_edge ? rng.uniform_int(1, 100) : rng.uniform_int(1, 10);
      detail::add_edge(a, i, j, static_cast<double>(w));
    }
  }
  return WeightedGraph(std::move(a));
}

/// Each pair (i < j, lexicographic) is kept with probability `density` and
/// given an integer weight in [1,10].
inline WeightedGraph gen_random(int n, double density, std::uint64_t seed) {
  if (n < 1) throw Error("random graph needs at least one vertex");
  if (!(density >= 0.0 && density <= 1.0)) throw Error("density must lie in [0,1]");
  Rng rng(seed);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform01() < density) {
        detail::add_edge(a, i, j, static_cast<double>(rng.uniform_int(1, 10)));
      }
    }
  }
  return WeightedGraph(std::move(a));
}

/// Binary de Bruijn graph of the given order: arcs x -> 2x and x -> 2x+1
/// (mod 2^order), then A + A^T with the diagonal cleared.
inline WeightedGraph gen_debruijn(int order) {
  if (order < 1 || order > 12) throw Error("de Bruijn order must lie in [1,12]");
  const int n = 1 << order;
  Matrix arcs = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    arcs(x, (2 * x) % n) += 1.0;
    arcs(x, (2 * x + 1) % n) += 1.0;
  }
  Matrix a = arcs + arcs.transpose();
  a.diagonal().setZero();
  return WeightedGraph(std::move(a));
}

}  // namespace cqb
