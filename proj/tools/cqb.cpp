// cqb: command-line front end for the graph partitioning solver.
//
//   cqb solve    --input g.el --bisection --bound sdp --json out.json
//   cqb bound    --gen random:30:0.2 --seed 4 --bisection --with-opt
//   cqb generate --gen toroidal:4x5 --seed 1 --output t.el
//   cqb check    --input g.el --l 1 --u 1 --point x.txt
//   cqb oracle   --input g.el --bisection
//
// Every subcommand prints one JSON document on stdout. Vertex labels in the
// output are 1-based, as in the edge-list format.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqb/bnb.hpp"
#include "cqb/generators.hpp"
#include "cqb/graph_io.hpp"
#include "cqb/optimality.hpp"
#include "cqb/oracle.hpp"

using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInputError = 2, kInfeasible = 3, kLimit = 4 };

struct GraphArgs {
  std::string input;
  std::string format;
  std::string gen;
  std::uint64_t seed = 1;
};

struct PartitionArgs {
  int lower = -1;
  int upper = -1;
  bool bisection = false;
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
  auto* in = cmd->add_option("--input", g.input, "graph file");
  cmd->add_option("--format", g.format, "el or mtx (default: from extension)")
      ->check(CLI::IsMember({"el", "mtx"}));
  auto* gen = cmd->add_option("--gen", g.gen,
                              "toroidal:HxK, planar:HxK, mixed:HxK, random:N:DENSITY, debruijn:ORDER");
  cmd->add_option("--seed", g.seed, "generator seed");
  in->excludes(gen);
}

void add_partition_options(CLI::App* cmd, PartitionArgs& p) {
  cmd->add_option("--l", p.lower, "lower bound on |V1|");
  cmd->add_option("--u", p.upper, "upper bound on |V1|");
  cmd->add_flag("--bisection", p.bisection, "l = floor(n/2), u = ceil(n/2) (default)");
}

std::pair<int, int> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw cqb::ParseError("grid size must look like HxK, got \"" + s + "\"");
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

cqb::WeightedGraph generate(const std::string& spec, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() < 2) throw cqb::ParseError("--gen expects KIND:ARGS, got \"" + spec + "\"");
  const std::string& kind = parts[0];
  try {
    if (kind == "toroidal" || kind == "planar" || kind == "mixed") {
      const auto [h, k] = parse_grid(parts[1]);
      if (kind == "toroidal") return cqb::gen_toroidal(h, k, seed);
      if (kind == "planar") return cqb::gen_planar(h, k, seed);
      return cqb::gen_mixed(h, k, seed);
    }
    if (kind == "random") {
      if (parts.size() != 3) throw cqb::ParseError("random generator expects random:N:DENSITY");
      return cqb::gen_random(std::stoi(parts[1]), std::stod(parts[2]), seed);
    }
    if (kind == "debruijn") return cqb::gen_debruijn(std::stoi(parts[1]));
  } catch (const std::logic_error&) {
    throw cqb::ParseError("malformed --gen argument \"" + spec + "\"");
  }
  throw cqb::ParseError("unknown generator \"" + kind + "\"");
}

cqb::WeightedGraph load(const GraphArgs& g) {
  if (!g.gen.empty()) return generate(g.gen, g.seed);
  if (g.input.empty()) throw cqb::ParseError("one of --input or --gen is required");
  cqb::GraphFormat format = cqb::format_from_path(g.input);
  if (g.format == "el") format = cqb::GraphFormat::EdgeList;
  if (g.format == "mtx") format = cqb::GraphFormat::MatrixMarket;
  return cqb::load_graph(g.input, format);
}

cqb::PartitionSpec partition(const PartitionArgs& p, int n) {
  const bool explicit_bounds = p.lower >= 0 || p.upper >= 0;
  if (p.bisection && explicit_bounds) throw cqb::ParseError("--bisection excludes --l/--u");
  if (!explicit_bounds) return cqb::PartitionSpec::bisection(n);
  if (p.lower < 0 || p.upper < 0) throw cqb::ParseError("--l and --u must be given together");
  if (p.lower > p.upper || p.upper > n) {
    throw cqb::InfeasibleError("no partition with " + std::to_string(p.lower) + " <= |V1| <= " +
                               std::to_string(p.upper) + " on " + std::to_string(n) + " vertices");
  }
  return {p.lower, p.upper};
}

// Cut values are integral for integer weights; print them without ".0".
json number(double v) {
  if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 9.0e15) return static_cast<long long>(v);
  return v;
}

json partition_json(const cqb::Vector& y) {
  const cqb::Partition p = cqb::partition_from_binary(y);
  json v0 = json::array(), v1 = json::array();
  for (int i : p.side0) v0.push_back(i + 1);
  for (int i : p.side1) v1.push_back(i + 1);
  return {{"V0", v0}, {"V1", v1}};
}

void emit(const json& doc, const std::string& path) {
  std::cout << doc.dump(2) << '\n';
  if (!path.empty()) {
    std::ofstream out(path);
    if (!out) throw cqb::Error("cannot write " + path);
    out << doc.dump(2) << '\n';
  }
}

cqb::Vector read_point(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw cqb::ParseError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line.substr(0, line.find('#')));
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw cqb::ParseError("point file: not a number \"" + tok + "\"");
      }
    }
  }
  if (static_cast<int>(values.size()) != n) {
    throw cqb::ParseError("point file has " + std::to_string(values.size()) + " entries, graph has " +
                          std::to_string(n) + " vertices");
  }
  return Eigen::Map<cqb::Vector>(values.data(), n);
}

cqb::BoundVariant variant_from(const std::string& s) {
  return s == "eig" ? cqb::BoundVariant::Eigenvalue : cqb::BoundVariant::Sdp;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact graph partitioning by branch and bound on a continuous quadratic program"};
  app.require_subcommand(1);

  GraphArgs graph_args;
  PartitionArgs part_args;
  std::string json_path;
  std::string bound = "sdp";
  double tol = 1e-4;
  long long max_nodes = 10'000'000;
  double time_limit = 3600.0;
  int threads = 1;
  bool with_opt = false;
  std::string output;
  std::string point_path;

  auto* solve_cmd = app.add_subcommand("solve", "solve to optimality");
  add_graph_options(solve_cmd, graph_args);
  add_partition_options(solve_cmd, part_args);
  solve_cmd->add_option("--bound", bound, "eig or sdp")->check(CLI::IsMember({"eig", "sdp"}));
  solve_cmd->add_option("--tol", tol, "stationarity tolerance of the subproblem solver");
  solve_cmd->add_option("--max-nodes", max_nodes, "node budget");
  solve_cmd->add_option("--time-limit", time_limit, "seconds");
  solve_cmd->add_option("--threads", threads, "parallel child evaluation")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--json", json_path, "also write the report here");

  auto* bound_cmd = app.add_subcommand("bound", "root lower bounds LB1 (eigenvalue) and LB2 (sdp)");
  add_graph_options(bound_cmd, graph_args);
  add_partition_options(bound_cmd, part_args);
  bound_cmd->add_option("--tol", tol, "stationarity tolerance");
  bound_cmd->add_flag("--with-opt", with_opt, "add the brute-force optimum (n <= 24)");
  bound_cmd->add_option("--json", json_path, "also write the report here");

  auto* gen_cmd = app.add_subcommand("generate", "write a generated graph as an edge list");
  add_graph_options(gen_cmd, graph_args);
  gen_cmd->add_option("--output", output, "edge-list path (default: stdout, no JSON)");

  auto* check_cmd = app.add_subcommand("check", "optimality conditions at a point");
  add_graph_options(check_cmd, graph_args);
  add_partition_options(check_cmd, part_args);
  check_cmd->add_option("--point", point_path, "whitespace-separated coordinates")->required();
  check_cmd->add_option("--json", json_path, "also write the report here");

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force optimum (n <= 24)");
  add_graph_options(oracle_cmd, graph_args);
  add_partition_options(oracle_cmd, part_args);
  oracle_cmd->add_option("--json", json_path, "also write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    const cqb::WeightedGraph g = load(graph_args);
    const int n = g.size();

    if (*gen_cmd) {
      if (output.empty()) {
        cqb::write_edge_list(std::cout, g);
        return kOk;
      }
      std::ofstream out(output);
      if (!out) throw cqb::Error("cannot write " + output);
      cqb::write_edge_list(out, g);
      emit({{"n", n}, {"m", g.edge_count()}, {"density_percent", g.density_percent()}, {"path", output}}, "");
      return kOk;
    }

    const cqb::PartitionSpec spec = partition(part_args, n);

    if (*solve_cmd) {
      cqb::SolverConfig cfg;
      cfg.bound = variant_from(bound);
      cfg.tol = tol;
      cfg.max_nodes = max_nodes;
      cfg.time_limit = time_limit;
      cfg.threads = threads;
      const cqb::Solution s = cqb::solve(g, spec, cfg);
      json trace = json::array();
      for (const auto& e : s.incumbent_trace) trace.push_back({{"node", e.node}, {"value", number(e.value)}});
      json doc = {{"n", n},
                  {"density_percent", g.density_percent()},
                  {"bound_variant", cqb::to_string(cfg.bound)},
                  {"opt_value", number(s.value)},
                  {"partition", s.y.size() ? partition_json(s.y) : json()},
                  {"node_count", s.node_count},
                  {"wall_time_s", s.wall_time},
                  {"status", cqb::to_string(s.status)},
                  {"root_LB", s.root_bound},
                  {"final_LB", s.final_bound},
                  {"incumbent_trace", trace}};
      emit(doc, json_path);
      return s.status == cqb::SolveStatus::Optimal ? kOk : kLimit;
    }

    if (*bound_cmd) {
      cqb::SolveOptions opts;
      opts.tol = tol;
      const auto lb1 = cqb::root_bound(g, spec, cqb::BoundVariant::Eigenvalue, opts);
      const auto lb2 = cqb::root_bound(g, spec, cqb::BoundVariant::Sdp, opts);
      json doc = {{"n", n},
                  {"density_percent", g.density_percent()},
                  {"LB1", lb1.bound},
                  {"LB2", lb2.bound},
                  {"sigma", lb1.shift.sigma},
                  {"n_sigma", lb1.shift.total()},
                  {"sdp_trace", lb2.shift.total()}};
      if (with_opt) doc["opt"] = number(cqb::brute_force(g, spec).value);
      emit(doc, json_path);
      return kOk;
    }

    if (*check_cmd) {
      const cqb::Vector x = read_point(point_path, n);
      const cqb::QpProblem qp = cqb::make_qp(g, spec);
      json doc = {{"n", n}, {"feasible", qp.feasible_set().contains(x, 1e-7)}, {"objective", qp.objective(x)}};
      if (!doc["feasible"].get<bool>()) {
        emit(doc, json_path);
        return kInfeasible;
      }
      const cqb::KktAssessment a = cqb::check_local_min(qp, x);
      doc["lambda"] = a.lambda;
      doc["P1"] = a.p1;
      doc["P2"] = a.p2;
      doc["P3"] = a.p3;
      doc["P4"] = a.p4;
      doc["local_min"] = a.local_min;
      doc["witness"] = {{"condition", cqb::to_string(a.witness.condition)},
                        {"i", a.witness.i >= 0 ? json(a.witness.i + 1) : json()},
                        {"j", a.witness.j >= 0 ? json(a.witness.j + 1) : json()},
                        {"measure", a.witness.measure}};
      if (a.local_min) {
        const cqb::StrictnessFlags f = cqb::check_strict(qp, x);
        doc["C1"] = f.c1;
        doc["C2"] = f.c2;
        doc["C3"] = f.c3;
        doc["strict"] = f.strict;
      }
      if (const auto d = cqb::descent_direction(qp, x, a)) {
        json dir = json::array();
        for (int i = 0; i < n; ++i) dir.push_back(d->direction(i));
        const cqb::Vector y = x + d->max_step * d->direction;
        doc["descent_direction"] = {{"source", cqb::to_string(d->source)},
                                    {"direction", dir},
                                    {"max_step", d->max_step},
                                    {"objective_at_max_step", qp.objective(y)}};
      } else {
        doc["descent_direction"] = nullptr;
      }
      emit(doc, json_path);
      return kOk;
    }

    if (*oracle_cmd) {
      const cqb::OracleResult o = cqb::brute_force(g, spec);
      if (!o.feasible) throw cqb::InfeasibleError("no feasible partition");
      emit({{"n", n}, {"opt_value", number(o.value)}, {"partition", partition_json(o.best)}}, json_path);
      return kOk;
    }
  } catch (const cqb::ParseError& e) {
    std::cerr << "cqb: " << e.what() << '\n';
    return kInputError;
  } catch (const cqb::InfeasibleError& e) {
    std::cerr << "cqb: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const cqb::Error& e) {
    std::cerr << "cqb: " << e.what() << '\n';
    return kInputError;
  }
  return kUsage;
}
