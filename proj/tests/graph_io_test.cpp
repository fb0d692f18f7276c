#include <gtest/gtest.h>

#include <sstream>

#include "cqb/graph_io.hpp"

using namespace cqb;

namespace {

WeightedGraph parse_el(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

WeightedGraph parse_mtx(const std::string& text) {
  std::istringstream in(text);
  return read_matrix_market(in);
}

}  // namespace

TEST(EdgeList, PathGraph) {
  const WeightedGraph g = parse_el("3 2\n1 2 1\n2 3 1\n");
  Matrix expected(3, 3);
  expected << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(g.weights(), expected);
}

TEST(EdgeList, CommentsAndZeroLoops) {
  const WeightedGraph g = parse_el("# header\n3 3 # trailing\n\n1 2 2.5\n3 3 0\n2 3 -1\n");
  EXPECT_EQ(g.weight(0, 1), 2.5);
  EXPECT_EQ(g.weight(2, 1), -1.0);
  EXPECT_FALSE(g.integral());
}

TEST(EdgeList, Errors) {
  EXPECT_THROW(parse_el(""), ParseError);
  EXPECT_THROW(parse_el("3 2\n1 2 1\n2 1 1\n"), ParseError);   // duplicate
  EXPECT_THROW(parse_el("3 1\n1 4 1\n"), ParseError);          // out of range
  EXPECT_THROW(parse_el("3 1\n2 2 1\n"), ParseError);          // self loop
  EXPECT_THROW(parse_el("3 2\n1 2 1\n"), ParseError);          // too few
  EXPECT_THROW(parse_el("3 1\n1 2 1\n2 3 1\n"), ParseError);   // too many
  EXPECT_THROW(parse_el("3 1\n1 2\n"), ParseError);            // missing weight
  EXPECT_THROW(parse_el("3 1\n1 2 x\n"), ParseError);
}

TEST(MatrixMarket, SymmetricPattern) {
  const WeightedGraph g = parse_mtx(
      "%%MatrixMarket matrix coordinate real general\n% c\n2 2 3\n1 2 5\n2 1 5\n1 1 7\n");
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.weight(1, 0), 1.0);
  EXPECT_EQ(g.weight(0, 0), 0.0);
}

TEST(MatrixMarket, SymmetricStorage) {
  const WeightedGraph g =
      parse_mtx("%%MatrixMarket matrix coordinate integer symmetric\n3 3 2\n2 1 4\n3 3 1\n");
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(MatrixMarket, NonsymmetricUsesGram) {
  // S = [[1,1],[0,1]], S^T S = [[1,1],[1,2]].
  const WeightedGraph g =
      parse_mtx("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n1 2 1\n2 2 1\n");
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(MatrixMarket, RectangularPattern) {
  // Columns 1 and 3 share row 1; column 2 is alone in row 2.
  const WeightedGraph g =
      parse_mtx("%%MatrixMarket matrix coordinate pattern general\n2 3 3\n1 1\n1 3\n2 2\n");
  EXPECT_EQ(g.size(), 3);
  EXPECT_EQ(g.weight(0, 2), 1.0);
  EXPECT_EQ(g.weight(0, 1), 0.0);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(MatrixMarket, Errors) {
  EXPECT_THROW(parse_mtx("hello\n"), ParseError);
  EXPECT_THROW(parse_mtx("%%MatrixMarket matrix array real general\n2 2\n"), ParseError);
  EXPECT_THROW(parse_mtx("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
               ParseError);
  EXPECT_THROW(parse_mtx("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 1\n"),
               ParseError);
}

TEST(GraphIo, RoundTripAndFormatDetection) {
  Matrix a = Matrix::Zero(4, 4);
  a(0, 3) = a(3, 0) = 0.1;
  a(1, 2) = a(2, 1) = 7.0;
  const WeightedGraph g(a);
  std::ostringstream out;
  write_edge_list(out, g);
  EXPECT_EQ(parse_el(out.str()).weights(), g.weights());
  EXPECT_EQ(format_from_path("x/y.MTX"), GraphFormat::MatrixMarket);
  EXPECT_EQ(format_from_path("p3.el"), GraphFormat::EdgeList);
  EXPECT_THROW(load_graph("/nonexistent/file.el", GraphFormat::EdgeList), ParseError);
}
