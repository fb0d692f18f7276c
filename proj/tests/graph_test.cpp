#include <gtest/gtest.h>

#include "cqb/graph.hpp"
#include "cqb/qp.hpp"
#include "test_support.hpp"

using namespace cqb;
using cqb::testing::complete;
using cqb::testing::path3;

TEST(WeightedGraph, RejectsAsymmetricAndLoops) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(WeightedGraph{a}, Error);
  a(1, 0) = 1.0;
  a(0, 0) = 2.0;
  EXPECT_THROW(WeightedGraph{a}, Error);
  EXPECT_THROW(WeightedGraph{Matrix::Zero(2, 3)}, Error);
}

TEST(WeightedGraph, CountsAndDensity) {
  const WeightedGraph g = complete(4);
  EXPECT_EQ(g.edge_count(), 6);
  EXPECT_DOUBLE_EQ(g.density_percent(), 100.0);
  EXPECT_EQ(path3().edge_count(), 2);
  EXPECT_TRUE(g.integral());
}

TEST(DiagonalShift, Examples) {
  EXPECT_EQ(build_diagonal_shift(complete(3)), Vector::Ones(3));
  EXPECT_EQ(build_diagonal_shift(path3()), Vector::Ones(3));
  const WeightedGraph neg = cqb::testing::from_edges(3, {{0, 1, -2.0}, {1, 2, -1.0}});
  EXPECT_EQ(build_diagonal_shift(neg), Vector::Zero(3));
}

TEST(DiagonalShift, PairConditionOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const int n = 3 + static_cast<int>(seed % 9);
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = static_cast<double>(rng.uniform_int(-5, 9));
    }
    const WeightedGraph g(a);
    const Vector d = build_diagonal_shift(g);
    for (int i = 0; i < n; ++i) {
      EXPECT_GE(d(i), 0.0);
      for (int j = 0; j < n; ++j) {
        if (i != j) EXPECT_GE(d(i) + d(j), 2.0 * a(i, j));
      }
    }
  }
}

TEST(CutWeight, Examples) {
  EXPECT_EQ(cut_weight(path3(), Vector::Unit(3, 0)), 1.0);
  EXPECT_EQ(cut_weight(complete(3), Vector::Unit(3, 0)), 2.0);
  EXPECT_EQ(cut_weight(complete(5), Vector::Zero(5)), 0.0);
  Vector frac = Vector::Zero(3);
  frac(1) = 0.5;
  EXPECT_THROW(cut_weight(path3(), frac), Error);
  EXPECT_THROW(cut_weight(path3(), Vector::Zero(2)), Error);
}

TEST(CutWeight, EqualsObjectiveOnBinaryPoints) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = gen_random(10, 0.5, seed);
    const QpProblem qp = make_qp(g, {0, 10});
    Rng rng(seed + 100);
    for (int t = 0; t < 1000; ++t) {
      const Vector y = cqb::testing::random_binary_feasible(rng, 10, 0, 10);
      // Integer weights: both sides are exact.
      EXPECT_EQ(cut_weight(g, y), qp.objective(y));
    }
  }
}

TEST(PartitionSpec, BisectionAndValidation) {
  EXPECT_EQ(PartitionSpec::bisection(6).lower, 3);
  EXPECT_EQ(PartitionSpec::bisection(6).upper, 3);
  EXPECT_EQ(PartitionSpec::bisection(7).lower, 3);
  EXPECT_EQ(PartitionSpec::bisection(7).upper, 4);
  EXPECT_THROW((PartitionSpec{3, 2}.validate(5)), Error);
  EXPECT_THROW((PartitionSpec{0, 6}.validate(5)), Error);
  EXPECT_NO_THROW((PartitionSpec{0, 5}.validate(5)));
}

TEST(IsBinary, Basic) {
  EXPECT_TRUE(is_binary(Vector::Zero(3)));
  Vector x = Vector::Ones(3);
  x(2) = 1.0 - 1e-12;
  EXPECT_FALSE(is_binary(x));
}
