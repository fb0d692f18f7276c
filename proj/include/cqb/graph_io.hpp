#pragma once

// Graph file formats.
//
// Edge list: a header line "n m" followed by m lines "i j w" with 1-based
// vertex indices. Text after '#' is a comment. Each unordered pair may appear
// at most once; a self loop is accepted only with zero weight.
//
// Matrix exchange (coordinate): "%%MatrixMarket matrix coordinate
// {real|integer|pattern} {general|symmetric}". A symmetric matrix S becomes
// the 0/1 adjacency pattern of its nonzero off-diagonal entries. A
// nonsymmetric (or rectangular) S becomes the 0/1 pattern of the nonzero
// off-diagonal entries of S^T S.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cqb/graph.hpp"

namespace cqb {

enum class GraphFormat { EdgeList, MatrixMarket };

namespace detail {

inline std::string strip_comment(const std::string& line, char mark) {
  const auto pos = line.find(mark);
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

inline std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// Reads the next non-blank, non-comment line; false at end of input.
inline bool next_content_line(std::istream& in, char comment, std::string& out, int& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_comment(line, comment);
    if (!blank(line)) {
      out = line;
      return true;
    }
  }
  return false;
}

[[noreturn]] inline void parse_fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

inline WeightedGraph read_edge_list(std::istream& in) {
  int line_no = 0;
  std::string line;
  if (!detail::next_content_line(in, '#', line, line_no)) {
    throw ParseError("edge list: missing header");
  }
  long long n = 0, m = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> m) || (hs >> extra)) detail::parse_fail(line_no, "expected header \"n m\"");
  }
  if (n < 0 || m < 0) detail::parse_fail(line_no, "negative size in header");
  Matrix a = Matrix::Zero(n, n);
  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n),
                                      std::vector<bool>(static_cast<std::size_t>(n), false));
  for (long long e = 0; e < m; ++e) {
    if (!detail::next_content_line(in, '#', line, line_no)) {
      throw ParseError("edge list: expected " + std::to_string(m) + " edges, found " +
                       std::to_string(e));
    }
    std::istringstream es(line);
    long long i = 0, j = 0;
    double w = 0.0;
    std::string extra;
    if (!(es >> i >> j >> w) || (es >> extra)) detail::parse_fail(line_no, "expected \"i j w\"");
    if (i < 1 || i > n || j < 1 || j > n) detail::parse_fail(line_no, "vertex index out of range");
    if (!std::isfinite(w)) detail::parse_fail(line_no, "non-finite weight");
    --i;
    --j;
    if (i == j) {
      if (w != 0.0) detail::parse_fail(line_no, "self loop with nonzero weight");
      continue;
    }
    if (seen[i][j]) detail::parse_fail(line_no, "duplicate edge");
    seen[i][j] = seen[j][i] = true;
    a(i, j) = a(j, i) = w;
  }
  if (detail::next_content_line(in, '#', line, line_no)) {
    detail::parse_fail(line_no, "more edges than declared in header");
  }
  return WeightedGraph(std::move(a));
}

inline WeightedGraph read_matrix_market(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream banner(detail::lower_case(line));
  std::string tag, object, layout, field, symmetry;
  banner >> tag >> object >> layout >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix") {
    detail::parse_fail(line_no, "missing %%MatrixMarket matrix banner");
  }
  if (layout != "coordinate") detail::parse_fail(line_no, "only coordinate layout is supported");
  const bool pattern = field == "pattern";
  if (!pattern && field != "real" && field != "integer") {
    detail::parse_fail(line_no, "unsupported field \"" + field + "\"");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    detail::parse_fail(line_no, "unsupported symmetry \"" + symmetry + "\"");
  }
  const bool declared_symmetric = symmetry == "symmetric";

  if (!detail::next_content_line(in, '%', line, line_no)) {
    throw ParseError("matrix market: missing size line");
  }
  long long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz)) detail::parse_fail(line_no, "expected \"rows cols nnz\"");
  }
  if (rows < 0 || cols < 0 || nnz < 0) detail::parse_fail(line_no, "negative size");
  if (declared_symmetric && rows != cols) detail::parse_fail(line_no, "symmetric matrix must be square");

  std::map<std::pair<long long, long long>, double> entries;
  for (long long e = 0; e < nnz; ++e) {
    if (!detail::next_content_line(in, '%', line, line_no)) {
      throw ParseError("matrix market: expected " + std::to_string(nnz) + " entries");
    }
    std::istringstream es(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(es >> i >> j)) detail::parse_fail(line_no, "expected \"i j [value]\"");
    if (!pattern && !(es >> v)) detail::parse_fail(line_no, "missing value");
    if (i < 1 || i > rows || j < 1 || j > cols) detail::parse_fail(line_no, "index out of range");
    if (!std::isfinite(v)) detail::parse_fail(line_no, "non-finite value");
    entries[{i - 1, j - 1}] += v;
    if (declared_symmetric && i != j) entries[{j - 1, i - 1}] += v;
  }

  bool symmetric = rows == cols;
  if (symmetric && !declared_symmetric) {
    for (const auto& [key, v] : entries) {
      const auto it = entries.find({key.second, key.first});
      const double mirror = it == entries.end() ? 0.0 : it->second;
      if (mirror != v) {
        symmetric = false;
        break;
      }
    }
  }

  if (symmetric) {
    Matrix a = Matrix::Zero(rows, rows);
    for (const auto& [key, v] : entries) {
      if (key.first != key.second && v != 0.0) a(key.first, key.second) = 1.0;
    }
    return WeightedGraph(std::move(a));
  }

  // Adjacency pattern of S^T S: columns p and q are adjacent when
  // sum_r s_rp s_rq != 0.
  std::vector<std::vector<std::pair<long long, double>>> by_row(static_cast<std::size_t>(rows));
  for (const auto& [key, v] : entries) {
    if (v != 0.0) by_row[key.first].emplace_back(key.second, v);
  }
  Matrix gram = Matrix::Zero(cols, cols);
  for (const auto& row : by_row) {
    for (const auto& [p, vp] : row) {
      for (const auto& [q, vq] : row) gram(p, q) += vp * vq;
    }
  }
  Matrix a = Matrix::Zero(cols, cols);
  for (long long p = 0; p < cols; ++p) {
    for (long long q = 0; q < cols; ++q) {
      if (p != q && gram(p, q) != 0.0) a(p, q) = 1.0;
    }
  }
  return WeightedGraph(std::move(a));
}

inline WeightedGraph read_graph(std::istream& in, GraphFormat format) {
  return format == GraphFormat::EdgeList ? read_edge_list(in) : read_matrix_market(in);
}

inline WeightedGraph load_graph(const std::string& path, GraphFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_graph(in, format);
}

/// Chooses the format from the file extension: ".mtx" is matrix exchange,
/// everything else is an edge list.
inline GraphFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && detail::lower_case(path.substr(dot)) == ".mtx") {
    return GraphFormat::MatrixMarket;
  }
  return GraphFormat::EdgeList;
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << g.size() << ' ' << g.edge_count() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < g.size(); ++i) {
    for (int j = i + 1; j < g.size(); ++j) {
      if (g.weight(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << g.weight(i, j) << '\n';
    }
  }
}

}  // namespace cqb
