#pragma once

// Exhaustive reference solver for small instances. Enumerates the free
// vertices in Gray-code order so that each step flips one vertex and updates
// the cut in O(n).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqb/graph.hpp"

namespace cqb {

struct OracleResult {
  double value = 0.0;
  Vector best;  // lexicographically largest minimizer (earliest vertices in V1)
  bool feasible = false;
};

constexpr int kOracleMaxVertices = 24;

/// Minimum cut over binary x with l <= 1^T x <= u. `fixed` (optional) holds
/// -1 for free vertices and 0/1 for vertices whose side is prescribed.
inline OracleResult brute_force(const WeightedGraph& g, const PartitionSpec& spec,
                                const std::vector<int>& fixed = {}) {
  const int n = g.size();
  spec.validate(n);
  if (!fixed.empty() && static_cast<int>(fixed.size()) != n) {
    throw Error("fixed assignment has wrong length");
  }
  std::vector<int> side(n, 0);
  std::vector<int> free;
  for (int i = 0; i < n; ++i) {
    if (fixed.empty() || fixed[i] < 0) {
      free.push_back(i);
    } else {
      side[i] = fixed[i] ? 1 : 0;
    }
  }
  if (static_cast<int>(free.size()) > kOracleMaxVertices) {
    throw Error("brute force limited to " + std::to_string(kOracleMaxVertices) + " free vertices");
  }
  const Matrix& a = g.weights();

  auto key_of = [&] {
    std::uint64_t key = 0;
    for (int i = 0; i < n; ++i) key = (key << 1) | static_cast<std::uint64_t>(side[i]);
    return key;
  };

  int ones = 0;
  double cut = 0.0;
  for (int i = 0; i < n; ++i) {
    ones += side[i];
    for (int j = i + 1; j < n; ++j) {
      if (side[i] != side[j]) cut += a(i, j);
    }
  }

  OracleResult out;
  std::uint64_t best_key = 0;
  auto consider = [&] {
    if (ones < spec.lower || ones > spec.upper) return;
    const std::uint64_t key = key_of();
    if (!out.feasible || cut < out.value || (cut == out.value && key > best_key)) {
      out.feasible = true;
      out.value = cut;
      best_key = key;
    }
  };

  consider();
  const std::uint64_t total = std::uint64_t{1} << free.size();
  for (std::uint64_t k = 1; k < total; ++k) {
    // Gray code k ^ (k >> 1) differs from its predecessor in the lowest set bit of k.
    const int bit = __builtin_ctzll(k);
    const int v = free[free.size() - 1 - bit];
    double delta = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == v) continue;
      delta += side[j] == side[v] ? a(v, j) : -a(v, j);
    }
    cut += delta;
    ones += side[v] ? -1 : 1;
    side[v] ^= 1;
    consider();
  }

  if (out.feasible) {
    out.best = Vector::Zero(n);
    for (int i = 0; i < n; ++i) out.best(i) = static_cast<double>((best_key >> (n - 1 - i)) & 1u);
    out.value = cut_weight(g, out.best);
  }
  return out;
}

}  // namespace cqb
