#include <doctest.h>

#include <random>

#include "ingrex/graph.hpp"
#include "test_util.hpp"

using namespace ingrex;

TEST_CASE("build_csr single edge") {
  const std::vector<Edge> edges{{0, 1}};
  const auto m = build_csr<double>(edges, 2, 2);
  CHECK(m.row_offsets == std::vector<int>{0, 1, 1});
  CHECK(m.col_indices == std::vector<int>{1});
  CHECK(m.values == std::vector<double>{1.0});
}

TEST_CASE("build_csr empty graph") {
  const auto m = build_csr<double>({}, 3, 3);
  CHECK(m.row_offsets == std::vector<int>{0, 0, 0, 0});
  CHECK(m.col_indices.empty());
}

TEST_CASE("build_csr sorts rows regardless of input order") {
  const std::vector<Edge> edges{{1, 0}, {0, 1}};
  const auto m = build_csr<double>(edges, 2, 2);
  CHECK(m.row_offsets == std::vector<int>{0, 1, 2});
  CHECK(m.col_indices == std::vector<int>{1, 0});
}

TEST_CASE("build_csr errors") {
  const std::vector<Edge> out_of_range{{0, 2}};
  CHECK_THROWS_AS(build_csr<double>(out_of_range, 2, 2), Error);
  try {
    build_csr<double>(out_of_range, 2, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  const std::vector<Edge> dup{{0, 1}, {0, 1}};
  try {
    build_csr<double>(dup, 2, 2);
    FAIL("expected DuplicateEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateEdge);
  }
}

TEST_CASE("build_csr drops explicit zeros") {
  const std::vector<Edge> edges{{0, 0}, {0, 1}};
  const std::vector<double> vals{0.0, 2.0};
  const auto m = build_csr<double>(edges, 1, 2, vals);
  CHECK(m.nnz() == 1);
  CHECK(m.coeff(0, 1) == 2.0);
}

TEST_CASE("undirected duplicate after symmetrization is rejected") {
  Graph g;
  g.node_count = 2;
  g.edges = {{0, 1}, {1, 0}};
  g.features = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(adjacency(g), Error);
}

TEST_CASE("spmv examples") {
  const std::vector<Edge> diag{{0, 0}, {1, 1}};
  const auto id = build_csr<double>(diag, 2, 2);
  CHECK(spmv(id, Eigen::Vector2d(3, 4)) == Eigen::Vector2d(3, 4));

  const std::vector<Edge> swap{{0, 1}, {1, 0}};
  const auto perm = build_csr<double>(swap, 2, 2);
  CHECK(spmv(perm, Eigen::Vector2d(1, 0)) == Eigen::Vector2d(0, 1));

  CHECK_THROWS_AS(spmv(perm, Eigen::Vector3d(1, 0, 0)), Error);
}

TEST_CASE("spmv matches a dense oracle on random matrices up to 8x8") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + trial % 8, cols = 1 + (trial / 8) % 8;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows, cols);
    std::vector<Edge> edges;
    std::vector<double> vals;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (coin(rng)) {
          dense(r, c) = u(rng);
          edges.emplace_back(r, c);
          vals.push_back(dense(r, c));
        }
    const auto m = build_csr<double>(edges, rows, cols, vals);
    Eigen::VectorXd v(cols);
    for (int c = 0; c < cols; ++c) v[c] = u(rng);
    CHECK((spmv(m, v) - dense * v).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((to_dense(transpose(m)) - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

namespace {

Graph make_graph(int n, std::vector<Edge> edges, bool directed) {
  Graph g;
  g.node_count = n;
  g.edges = std::move(edges);
  g.directed = directed;
  g.features = Eigen::MatrixXd::Ones(n, 1);
  return g;
}

}  // namespace

TEST_CASE("column normalization examples") {
  const auto path = column_normalized_adjacency(make_graph(2, {{0, 1}}, false));
  CHECK(path.mode == NormMode::ColumnNormalized);
  Eigen::Matrix2d expected;
  expected << 0, 1, 1, 0;
  CHECK(to_dense(path.matrix) == Eigen::MatrixXd(expected));

  const auto single = column_normalized_adjacency(make_graph(1, {}, false));
  CHECK(to_dense(single.matrix) == Eigen::MatrixXd::Ones(1, 1));

  // Star 1 -> {2, 3}; nodes 0, 2, 3 are dangling.
  const auto star = column_normalized_adjacency(make_graph(4, {{1, 2}, {1, 3}}, true));
  const Eigen::MatrixXd d = to_dense(star.matrix);
  CHECK(d(2, 1) == doctest::Approx(0.5));
  CHECK(d(3, 1) == doctest::Approx(0.5));
  CHECK(d(0, 0) == 1.0);
  for (int c = 0; c < 4; ++c) CHECK(d.col(c).sum() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(column_normalized_adjacency(make_graph(0, {}, false)), Error);
}

TEST_CASE("column normalization property: every column sums to one") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_graph(1 + trial % 12, 0.3, trial % 2 == 0, 1, rng);
    const Eigen::MatrixXd d = to_dense(column_normalized_adjacency(g).matrix);
    for (int c = 0; c < g.node_count; ++c) CHECK(std::abs(d.col(c).sum() - 1.0) <= 1e-9);
    // Transpose of the row-normalized adjacency (with dangling self-loops).
    Eigen::MatrixXd a = testing::dense_adjacency(g);
    for (int r = 0; r < g.node_count; ++r) {
      if (a.row(r).sum() == 0.0) a(r, r) = 1.0;
      a.row(r) /= a.row(r).sum();
    }
    CHECK((d - a.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("symmetric normalization examples") {
  const Eigen::MatrixXd pair = to_dense(sym_normalized_adjacency(make_graph(2, {{0, 1}}, false)).matrix);
  CHECK((pair - Eigen::MatrixXd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK(to_dense(sym_normalized_adjacency(make_graph(1, {}, false)).matrix) == Eigen::MatrixXd::Ones(1, 1));

  const auto tri = sym_normalized_adjacency(make_graph(3, {{0, 1}, {1, 2}, {2, 0}}, false));
  CHECK(tri.matrix.nnz() == 9);
  for (double v : tri.matrix.values) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("symmetric normalization property: symmetric and equal to the dense formula") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_graph(1 + trial % 10, 0.35, false, 1, rng);
    const Eigen::MatrixXd s = to_dense(sym_normalized_adjacency(g).matrix);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd at = testing::dense_adjacency(g) + Eigen::MatrixXd::Identity(g.node_count, g.node_count);
    const Eigen::VectorXd inv_sqrt = at.rowwise().sum().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd oracle = inv_sqrt.asDiagonal() * at * inv_sqrt.asDiagonal();
    CHECK((s - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
