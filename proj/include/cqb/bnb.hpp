#pragma once

// Best-first branch and bound on the continuous formulation. Level i of the
// tree fixes the i-th vertex of a static ordering (heaviest incident weight
// first) to 0 or 1. Each leaf is bounded by the convex relaxation of its
// reduced problem, solved by gradient projection and certified through the
// linearization bound. Upper bounds come from the relaxation minimizer of
// every evaluated node: nonconvex descent, rounding to a binary point, and
// descent-direction repair while the binary point is not a local minimizer.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "cqb/bounds.hpp"
#include "cqb/graph.hpp"
#include "cqb/optimality.hpp"
#include "cqb/projgrad.hpp"
#include "cqb/qp.hpp"
#include "cqb/rounding.hpp"

namespace cqb {

enum class BoundVariant { Eigenvalue, Sdp };
enum class SolveStatus { Optimal, NodeLimit, TimeLimit };

inline const char* to_string(BoundVariant b) { return b == BoundVariant::Sdp ? "sdp" : "eig"; }

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NodeLimit: return "node_limit";
    case SolveStatus::TimeLimit: return "time_limit";
  }
  return "?";
}

struct SolverConfig {
  BoundVariant bound = BoundVariant::Sdp;
  double tol = 1e-4;              // stationarity tolerance of every gradient projection solve
  int max_iter = 10000;
  long long max_nodes = 10'000'000;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  int threads = 1;
  int heuristic_every = 1;        // upper-bound attempt at every k-th evaluated node
  double prune_eps = 1e-6;
  bool per_node_shift = false;    // recompute the shift for each M_FF instead of restricting the root shift
  int repair_rounds = 8;
  bool record_nodes = false;
};

/// One evaluated node, kept when SolverConfig::record_nodes is set.
struct NodeRecord {
  std::vector<int> fixed;  // -1 free, else the fixed side, per original vertex
  double bound = 0.0;
  int depth = 0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = true;
  bool exact = false;      // every vertex fixed; bound is the cut value
  double heuristic_start = std::numeric_limits<double>::quiet_NaN();  // f_tau at the relaxation minimizer
  double incumbent_after = std::numeric_limits<double>::quiet_NaN();
};

struct IncumbentEvent {
  long long node = 0;
  double value = 0.0;
};

struct Solution {
  Vector y;
  Partition partition;
  double value = std::numeric_limits<double>::infinity();
  SolveStatus status = SolveStatus::Optimal;
  long long node_count = 0;
  double root_bound = -std::numeric_limits<double>::infinity();
  double final_bound = -std::numeric_limits<double>::infinity();
  double wall_time = 0.0;
  std::vector<int> order;
  std::vector<double> bound_trace;  // global lower bound each time a leaf is expanded
  std::vector<IncumbentEvent> incumbent_trace;
  std::vector<NodeRecord> nodes;
};

/// Vertices sorted by incident weight, heaviest first; ties by index.
inline std::vector<int> order_vertices(const WeightedGraph& g) {
  const Vector w = g.incident_weight();
  std::vector<int> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w(a) > w(b); });
  return order;
}

/// Bounds above this value cannot lead to a strictly better binary point.
inline double prune_threshold(double incumbent, bool integral, double eps = 1e-6) {
  if (!std::isfinite(incumbent)) return std::numeric_limits<double>::infinity();
  return integral ? incumbent - 1.0 + eps : incumbent - eps;
}

inline DcShift compute_shift(const Matrix& m, BoundVariant variant) {
  return variant == BoundVariant::Sdp ? sdp_shift(m) : sigma_shift(m);
}

/// Descent, rounding and local-minimizer repair from a feasible point of the
/// reduced problem. The result never has a larger objective than the start.
template <StructuredQp P>
Vector improve_to_binary(const P& problem, const Vector& start, const SolverConfig& config) {
  SolveOptions opts;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  Vector x = descend_nonconvex(problem, start, opts).x;
  Vector y = round_to_binary(problem, x).y;
  double fy = problem.objective(y);
  const FeasibleSet set = problem.feasible_set();
  for (int round = 0; round < config.repair_rounds; ++round) {
    const KktAssessment a = check_local_min(problem, y);
    if (a.local_min) break;
    Vector restart = y;
    if (a.p1) {
      const auto dir = descent_direction(problem, y, a);
      if (!dir) break;
      restart = project(y + dir->max_step * dir->direction, set);
    }
    x = descend_nonconvex(problem, restart, opts).x;
    Vector candidate = round_to_binary(problem, x).y;
    const double fc = problem.objective(candidate);
    if (!(fc < fy - 1e-9 * (1.0 + std::abs(fy)))) break;
    y = std::move(candidate);
    fy = fc;
  }
  return y;
}

namespace detail {

struct Evaluation {
  SubproblemLabel label;
  double bound = 0.0;
  Vector relax_full;  // relaxation minimizer in full coordinates
  Vector candidate;   // binary feasible point (full), empty when no attempt
  bool exact = false;
  NodeRecord record;
};

struct OpenNode {
  SubproblemLabel label;
  double bound = 0.0;
  long long id = 0;
  Vector relax_full;
};

struct OpenNodeOrder {
  // priority_queue pops the "largest"; we want smallest bound, then deepest, then oldest.
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.label.depth() != b.label.depth()) return a.label.depth() < b.label.depth();
    return a.id > b.id;
  }
};

class Search {
 public:
  Search(const WeightedGraph& g, const PartitionSpec& spec, const SolverConfig& config)
      : graph_(g), config_(config), qp_(make_qp(g, spec)), order_(order_vertices(g)),
        shift_(compute_shift(qp_.coupling(), config.bound)), integral_(g.integral()) {}

  Solution run() {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    Solution sol;
    sol.order = order_;

    std::priority_queue<OpenNode, std::vector<OpenNode>, OpenNodeOrder> open;
    long long next_id = 0;

    auto absorb = [&](Evaluation&& ev) {
      ++sol.node_count;
      if (ev.candidate.size() > 0) offer(sol, ev.candidate);
      if (config_.record_nodes) {
        ev.record.incumbent_after = sol.value;
        sol.nodes.push_back(std::move(ev.record));
      }
      if (!ev.exact && ev.bound <= threshold(sol)) {
        open.push({std::move(ev.label), ev.bound, next_id++, std::move(ev.relax_full)});
      }
    };

    Evaluation root = evaluate(SubproblemLabel{}, std::nullopt,
                               -std::numeric_limits<double>::infinity(), 0);
    sol.root_bound = root.bound;
    absorb(std::move(root));

    sol.status = SolveStatus::Optimal;
    while (!open.empty()) {
      if (open.top().bound > threshold(sol)) break;
      if (sol.node_count >= config_.max_nodes) {
        sol.status = SolveStatus::NodeLimit;
        break;
      }
      if (elapsed() > config_.time_limit) {
        sol.status = SolveStatus::TimeLimit;
        break;
      }
      OpenNode node = open.top();
      open.pop();
      sol.bound_trace.push_back(node.bound);

      std::vector<SubproblemLabel> children;
      for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
        SubproblemLabel child = node.label.child(bit);
        if (label_feasible(qp_, child)) children.push_back(std::move(child));
      }
      std::vector<Evaluation> results;
      if (config_.threads > 1 && children.size() > 1) {
        std::vector<std::future<Evaluation>> jobs;
        for (std::size_t c = 0; c < children.size(); ++c) {
          jobs.push_back(std::async(std::launch::async, [&, c] {
            return evaluate(children[c], node.relax_full, node.bound, sol.node_count + 1 + c);
          }));
        }
        for (auto& j : jobs) results.push_back(j.get());
      } else {
        for (std::size_t c = 0; c < children.size(); ++c) {
          results.push_back(evaluate(children[c], node.relax_full, node.bound,
                                     sol.node_count + 1 + static_cast<long long>(c)));
        }
      }
      for (auto& ev : results) absorb(std::move(ev));
    }

    if (sol.status == SolveStatus::Optimal) {
      sol.final_bound = open.empty() ? sol.value : std::min(open.top().bound, sol.value);
    } else {
      sol.final_bound = open.empty() ? sol.value : open.top().bound;
    }
    if (sol.y.size() > 0) sol.partition = partition_from_binary(sol.y);
    sol.wall_time = elapsed();
    return sol;
  }

  const DcShift& shift() const { return shift_; }

 private:
  double threshold(const Solution& sol) const {
    return prune_threshold(sol.value, integral_, config_.prune_eps);
  }

  void offer(Solution& sol, const Vector& y) const {
    const double v = cut_weight(graph_, y);
    if (v < sol.value) {
      sol.value = v;
      sol.y = y;
      sol.incumbent_trace.push_back({sol.node_count, v});
    }
  }

  Evaluation evaluate(const SubproblemLabel& label, const std::optional<Vector>& warm,
                      double parent_bound, long long node_index) const {
    Evaluation ev;
    ev.label = label;
    const ReducedQp reduced = reduce(qp_, label, order_);
    ev.record.depth = label.depth();
    ev.record.fixed.assign(qp_.dimension(), -1);
    for (int j = 0; j < label.depth(); ++j) ev.record.fixed[order_[j]] = label.bits[j];

    if (reduced.dimension() == 0) {
      ev.exact = true;
      ev.candidate = reduced.fixed;
      ev.bound = reduced.constant;
      ev.relax_full = reduced.fixed;
      ev.record.exact = true;
      ev.record.bound = ev.bound;
      return ev;
    }

    const ConvexRelaxation rel =
        config_.per_node_shift
            ? build_relaxation_local(reduced, compute_shift(reduced.block, config_.bound))
            : build_relaxation(reduced, shift_);
    const FeasibleSet set = rel.feasible_set();
    Vector x0;
    if (warm) {
      x0 = project(reduced.restrict(*warm), set);
    } else {
      const double mid = 0.5 * (set.budget_lo + set.budget_hi);
      x0 = project(Vector::Constant(reduced.dimension(), mid / reduced.dimension()), set);
    }
    SolveOptions opts;
    opts.tol = config_.tol;
    opts.max_iter = config_.max_iter;
    const ConvexSolveResult solved = solve_convex(rel, x0, opts);
    // A child's completions are among the parent's, so the parent bound still applies.
    ev.bound = std::max(solved.bound, parent_bound);
    ev.relax_full = reduced.expand(solved.report.x);
    ev.record.bound = ev.bound;
    ev.record.residual = solved.report.residual;
    ev.record.iterations = solved.report.iterations;
    ev.record.converged = solved.report.converged;

    if (config_.heuristic_every <= 1 || node_index % config_.heuristic_every == 0) {
      ev.record.heuristic_start = reduced.objective(solved.report.x);
      const Vector y = improve_to_binary(reduced, solved.report.x, config_);
      ev.candidate = reduced.expand(y);
    }
    return ev;
  }

  const WeightedGraph& graph_;
  SolverConfig config_;
  QpProblem qp_;
  std::vector<int> order_;
  DcShift shift_;
  bool integral_;
};

}  // namespace detail

inline Solution solve(const WeightedGraph& g, const PartitionSpec& spec, const SolverConfig& config = {}) {
  spec.validate(g.size());
  detail::Search search(g, spec, config);
  return search.run();
}

/// Root relaxation bound for one shift variant, with the relaxation minimizer.
struct RootBound {
  double bound = 0.0;
  double relaxation_value = 0.0;
  SolveReport report;
  DcShift shift;
};

inline RootBound root_bound(const WeightedGraph& g, const PartitionSpec& spec, BoundVariant variant,
                            const SolveOptions& opts = {}) {
  const QpProblem qp = make_qp(g, spec);
  RootBound out;
  out.shift = compute_shift(qp.coupling(), variant);
  const ReducedQp reduced = reduce(qp);
  if (reduced.dimension() == 0) return out;
  const ConvexRelaxation rel = build_relaxation(reduced, out.shift);
  const FeasibleSet set = rel.feasible_set();
  const double mid = 0.5 * (set.budget_lo + set.budget_hi);
  const Vector x0 = project(Vector::Constant(reduced.dimension(), mid / reduced.dimension()), set);
  const ConvexSolveResult solved = solve_convex(rel, x0, opts);
  out.bound = solved.bound;
  out.relaxation_value = solved.report.value;
  out.report = solved.report;
  return out;
}

}  // namespace cqb
