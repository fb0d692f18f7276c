#include <gtest/gtest.h>

#include "cqb/oracle.hpp"
#include "cqb/optimality.hpp"
#include "cqb/projgrad.hpp"
#include "test_support.hpp"

using namespace cqb;

TEST(Multipliers, InteriorBudgetGivesZero) {
  const QpProblem qp = make_qp(cqb::testing::path3(), {0, 3});
  Vector x(3);
  x << 1.0, 0.0, 0.0;
  const Multipliers m = multipliers(qp, x);
  EXPECT_EQ(m.lambda, 0.0);
  EXPECT_EQ(m.mu, qp.gradient(x));
}

TEST(Multipliers, BinaryPointTakesIntervalMidpoint) {
  // P3 with l = u = 1 at x = e_1: g = (0, 1, 2). lambda must satisfy
  // mu_1 = lambda <= 0, mu_2 = 1 + lambda >= 0, mu_3 = 2 + lambda >= 0.
  const QpProblem qp = make_qp(cqb::testing::path3(), {1, 1});
  const Vector x = Vector::Unit(3, 0);
  Vector g(3);
  g << 0.0, 1.0, 2.0;
  EXPECT_EQ(qp.gradient(x), g);
  const Multipliers m = multipliers(qp, x);
  EXPECT_FALSE(m.interval_empty);
  EXPECT_DOUBLE_EQ(m.lambda, -0.5);
  EXPECT_TRUE(check_first_order(qp, x, m.lambda, m.mu));
  EXPECT_TRUE(check_first_order(qp, x, -0.9, g.array() - 0.9));
  EXPECT_FALSE(check_first_order(qp, x, 0.5, g.array() + 0.5));
}

TEST(Multipliers, EmptyIntervalIsReported) {
  // P3 at x = e_2 (center on its own): g = (0, 1, 0) so x_1 = 0 needs
  // lambda >= 0 but x_2 = 1 needs lambda <= -1.
  const QpProblem qp = make_qp(cqb::testing::path3(), {1, 1});
  const Multipliers m = multipliers(qp, Vector::Unit(3, 1));
  EXPECT_TRUE(m.interval_empty);
  EXPECT_DOUBLE_EQ(m.gap, 1.0);
  EXPECT_FALSE(check_local_min(qp, Vector::Unit(3, 1)).p1);
}

TEST(FirstOrder, StationaryPointOfConvexifiedInstance) {
  // The minimizer of a convex relaxation is a KKT point of that relaxation.
  const QpProblem qp = make_qp(gen_random(8, 0.5, 3), {3, 5});
  const ReducedQp root = reduce(qp);
  const ConvexRelaxation rel = build_relaxation(root, sdp_shift(qp.coupling()));
  SolveOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 200000;
  const SolveReport r = gradient_projection(rel, rel.feasible_set(), Vector::Constant(8, 0.5), opts);
  // Same feasible set, gradient of the relaxation.
  struct Wrapped {
    const ConvexRelaxation& rel;
    int dimension() const { return rel.dimension(); }
    double objective(const Vector& x) const { return rel.objective(x); }
    Vector gradient(const Vector& x) const { return rel.gradient(x); }
    double curvature(const Vector& d) const { return rel.curvature(d); }
    const Matrix& coupling() const { return rel.reduced.block; }
    int budget_lower() const { return rel.reduced.budget_lower(); }
    int budget_upper() const { return rel.reduced.budget_upper(); }
    FeasibleSet feasible_set() const { return rel.feasible_set(); }
  } w{rel};
  const Multipliers m = multipliers(w, r.x);
  EXPECT_TRUE(check_first_order(w, r.x, m.lambda, m.mu));
}

TEST(LocalMin, OracleOptimaAreLocalMinima) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int n = 5 + static_cast<int>(seed % 4);
    const WeightedGraph g = gen_random(n, 0.6, seed);
    const PartitionSpec spec = seed % 2 ? PartitionSpec::bisection(n) : PartitionSpec{1, n - 1};
    const OracleResult o = brute_force(g, spec);
    const QpProblem qp = make_qp(g, spec);
    const KktAssessment a = check_local_min(qp, o.best);
    EXPECT_TRUE(a.local_min) << "seed " << seed << " witness " << to_string(a.witness.condition);
  }
}

TEST(LocalMin, HalfPointOnK2IsStationarySaddle) {
  const QpProblem qp = make_qp(cqb::testing::complete(2), {0, 2});
  const Vector half = Vector::Constant(2, 0.5);
  EXPECT_TRUE(qp.gradient(half).isZero(0.0));
  const KktAssessment a = check_local_min(qp, half);
  EXPECT_TRUE(a.p1);
  EXPECT_EQ(a.lambda, 0.0);
  // d_11 + d_22 = 2 a_12, so P2 holds; f drops along e_1 since d_11 > 0.
  EXPECT_TRUE(a.p2);
  EXPECT_FALSE(a.p4);
  EXPECT_EQ(a.witness.condition, Condition::P4a);
  EXPECT_FALSE(a.local_min);
}

TEST(LocalMin, SignPairingViolation) {
  const QpProblem qp = make_qp(cqb::testing::path3(), {1, 1});
  const KktAssessment a = check_local_min(qp, Vector::Unit(3, 1));
  EXPECT_FALSE(a.p1);
  EXPECT_FALSE(a.local_min);
  EXPECT_EQ(a.witness.condition, Condition::P1);
}

TEST(LocalMin, FreePairWithPositiveGapFailsP2) {
  // Star with two leaves, x = (1, .5, .5): leaves are free; d + d - 2a = 2 > 0.
  const QpProblem qp = make_qp(cqb::testing::star(2), {2, 2});
  Vector x(3);
  x << 1.0, 0.5, 0.5;
  const KktAssessment a = check_local_min(qp, x);
  EXPECT_TRUE(a.p1);
  EXPECT_FALSE(a.p2);
  EXPECT_EQ(a.witness.condition, Condition::P2);
  EXPECT_EQ(a.witness.i, 1);
  EXPECT_EQ(a.witness.j, 2);
}

TEST(LocalMin, BinaryStrictSeparation) {
  const QpProblem qp = make_qp(cqb::testing::path3(), {1, 1});
  const KktAssessment a = check_local_min(qp, Vector::Unit(3, 0));
  EXPECT_TRUE(a.local_min);
  EXPECT_TRUE(cqb::testing::neighbor_local_min(qp, Vector::Unit(3, 0), 0x1p-12));
}

TEST(LocalMin, AgreesWithNeighborOracle) {
  Rng rng(77);
  int positives = 0;
  for (int t = 0; t < 400; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 6));
    const WeightedGraph g = t % 5 == 0 ? cqb::testing::complete(n)
                                       : gen_random(n, 0.3 + 0.7 * rng.uniform01(), rng.next());
    const int lo = static_cast<int>(rng.uniform_int(0, n));
    const int hi = static_cast<int>(rng.uniform_int(lo, n));
    const QpProblem qp = make_qp(g, {lo, hi});
    const Vector x = cqb::testing::random_grid_point(rng, n, lo, hi, t % 3 == 0 ? 2 : 4);
    const bool expected = cqb::testing::neighbor_local_min(qp, x, 0x1p-12);
    const KktAssessment a = check_local_min(qp, x);
    positives += expected;
    EXPECT_EQ(a.local_min, expected) << "t=" << t << " witness " << to_string(a.witness.condition);
  }
  EXPECT_GT(positives, 40);
}

TEST(Strict, TieViaConstantMove) {
  // K2 with l = u = 1: (1,0) and (0,1) are joined by a move along which f is
  // constant, so neither is a strict local minimizer.
  const QpProblem qp = make_qp(cqb::testing::complete(2), {1, 1});
  const Vector x = Vector::Unit(2, 0);
  EXPECT_TRUE(check_local_min(qp, x).local_min);
  const StrictnessFlags s = check_strict(qp, x);
  EXPECT_TRUE(s.c1);
  EXPECT_FALSE(s.c2);
  EXPECT_FALSE(s.strict);
}

TEST(Strict, UniqueOptimumIsStrict) {
  // Path with a light middle edge and l = u = 2: the optimum cuts only that
  // edge, and every feasible move away from it raises f to first order.
  const WeightedGraph g =
      cqb::testing::from_edges(4, {{0, 1, 5.0}, {1, 2, 1.0}, {2, 3, 5.0}});
  const PartitionSpec spec{2, 2};
  const OracleResult o = brute_force(g, spec);
  EXPECT_EQ(o.value, 1.0);
  const QpProblem qp = make_qp(g, spec);
  const StrictnessFlags s = check_strict(qp, o.best);
  EXPECT_TRUE(s.strict);
}

TEST(Strict, FreeCoordinateFailsC1) {
  const QpProblem qp = make_qp(cqb::testing::complete(2), {0, 2});
  EXPECT_FALSE(check_strict(qp, Vector::Constant(2, 0.5)).c1);
}

TEST(DescentDirection, P2DecreaseIsQuadratic) {
  const QpProblem qp = make_qp(cqb::testing::star(2), {2, 2});
  Vector x(3);
  x << 1.0, 0.5, 0.5;
  const KktAssessment a = check_local_min(qp, x);
  const auto d = descent_direction(qp, x, a);
  ASSERT_TRUE(d.has_value());
  const Matrix& q = qp.coupling();
  const double gap = q(1, 1) + q(2, 2) - 2.0 * q(1, 2);
  for (double alpha : {0.1, 0.25, d->max_step}) {
    EXPECT_NEAR(qp.objective(x + alpha * d->direction), qp.objective(x) - alpha * alpha * gap, 1e-12);
  }
}

TEST(DescentDirection, P4aDropsByDiagonal) {
  const QpProblem qp = make_qp(cqb::testing::complete(2), {0, 2});
  const Vector x = Vector::Constant(2, 0.5);
  const KktAssessment a = check_local_min(qp, x);
  const auto d = descent_direction(qp, x, a);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(d->source, Condition::P4a);
  const int i = a.witness.i;
  for (double alpha : {0.1, 0.5}) {
    EXPECT_NEAR(qp.objective(x + alpha * d->direction),
                qp.objective(x) - alpha * alpha * qp.coupling()(i, i), 1e-12);
  }
}

TEST(DescentDirection, NoneAtLocalMin) {
  const QpProblem qp = make_qp(cqb::testing::path3(), {1, 1});
  const Vector x = Vector::Unit(3, 0);
  EXPECT_FALSE(descent_direction(qp, x, check_local_min(qp, x)).has_value());
}

TEST(DescentDirection, AlwaysStrictlyDecreasesOnKktPoints) {
  Rng rng(5);
  int found = 0;
  for (int t = 0; t < 600; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 6));
    const WeightedGraph g = t % 3 == 0 ? cqb::testing::complete(n) : gen_random(n, 0.6, rng.next());
    const int lo = static_cast<int>(rng.uniform_int(0, n));
    const int hi = static_cast<int>(rng.uniform_int(lo, n));
    const QpProblem qp = make_qp(g, {lo, hi});
    const Vector x = cqb::testing::random_grid_point(rng, n, lo, hi, 2);
    const KktAssessment a = check_local_min(qp, x);
    const auto d = descent_direction(qp, x, a);
    if (!d) continue;
    ++found;
    const Vector y = x + d->max_step * d->direction;
    EXPECT_TRUE(qp.feasible_set().contains(y, 1e-12));
    EXPECT_LT(qp.objective(y), qp.objective(x));
  }
  EXPECT_GT(found, 10);
}
