#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ingrex/error.hpp"

namespace ingrex {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Compressed sparse rows. Column indices are strictly increasing within a
/// row and no explicit zeros are stored.
template <typename Scalar = double>
struct CsrMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets{0};
  std::vector<int> col_indices;
  std::vector<Scalar> values;

  int nnz() const { return static_cast<int>(col_indices.size()); }

  /// Position of entry (row, col) in the value array, or -1.
  int find(int row, int col) const {
    const auto first = col_indices.begin() + row_offsets[row];
    const auto last = col_indices.begin() + row_offsets[row + 1];
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return -1;
    return static_cast<int>(it - col_indices.begin());
  }

  Scalar coeff(int row, int col) const {
    const int pos = find(row, col);
    return pos < 0 ? Scalar(0) : values[pos];
  }

  template <typename F>
  void for_each(F&& f) const {
    for (int r = 0; r < n_rows; ++r)
      for (int p = row_offsets[r]; p < row_offsets[r + 1]; ++p)
        f(p, r, col_indices[p], values[p]);
  }
};

/// Builds a canonical CSR from an edge list. Edge (r, c) lands at row r,
/// column c. Missing values default to 1; zero values are dropped.
template <typename Scalar = double>
CsrMatrix<Scalar> build_csr(std::span<const Edge> edges, int n_rows, int n_cols,
                            std::span<const Scalar> values = {}) {
  if (!values.empty() && values.size() != edges.size())
    throw Error(ErrorCode::DimensionMismatch, "build_csr: values length differs from edge count");
  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [r, c] = edges[i];
    if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
      throw Error(ErrorCode::OutOfRange, "build_csr: edge (" + std::to_string(r) + "," +
                                             std::to_string(c) + ") outside " +
                                             std::to_string(n_rows) + "x" + std::to_string(n_cols));
    order[i] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });

  CsrMatrix<Scalar> m;
  m.n_rows = n_rows;
  m.n_cols = n_cols;
  m.row_offsets.assign(n_rows + 1, 0);
  m.col_indices.reserve(edges.size());
  m.values.reserve(edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& e = edges[order[k]];
    if (k > 0 && edges[order[k - 1]] == e)
      throw Error(ErrorCode::DuplicateEdge, "build_csr: duplicate edge (" + std::to_string(e.first) +
                                                "," + std::to_string(e.second) + ")");
    const Scalar v = values.empty() ? Scalar(1) : values[order[k]];
    if (v == Scalar(0)) continue;
    m.col_indices.push_back(e.second);
    m.values.push_back(v);
    ++m.row_offsets[e.first + 1];
  }
  std::partial_sum(m.row_offsets.begin(), m.row_offsets.end(), m.row_offsets.begin());
  return m;
}

template <typename Scalar, typename Derived>
Vector<Scalar> spmv(const CsrMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& v) {
  if (v.size() != m.n_cols)
    throw Error(ErrorCode::DimensionMismatch, "spmv: vector length " + std::to_string(v.size()) +
                                                  " != n_cols " + std::to_string(m.n_cols));
  Vector<Scalar> out = Vector<Scalar>::Zero(m.n_rows);
  for (int r = 0; r < m.n_rows; ++r) {
    Scalar acc(0);
    for (int p = m.row_offsets[r]; p < m.row_offsets[r + 1]; ++p)
      acc += m.values[p] * v[m.col_indices[p]];
    out[r] = acc;
  }
  return out;
}

/// (m ⊙ scale) * x, where scale holds one multiplier per stored entry.
/// An empty scale means all ones.
template <typename Scalar, typename Derived>
Matrix<Scalar> spmm(const CsrMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& x,
                    std::span<const Scalar> scale = {}) {
  if (x.rows() != m.n_cols)
    throw Error(ErrorCode::DimensionMismatch, "spmm: operand rows " + std::to_string(x.rows()) +
                                                  " != n_cols " + std::to_string(m.n_cols));
  if (!scale.empty() && static_cast<int>(scale.size()) != m.nnz())
    throw Error(ErrorCode::MisalignedMask, "spmm: scale length differs from nnz");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(m.n_rows, x.cols());
  for (int r = 0; r < m.n_rows; ++r)
    for (int p = m.row_offsets[r]; p < m.row_offsets[r + 1]; ++p) {
      const Scalar w = scale.empty() ? m.values[p] : m.values[p] * scale[p];
      out.row(r) += w * x.row(m.col_indices[p]);
    }
  return out;
}

/// (m ⊙ scale)^T * x without materializing the transpose.
template <typename Scalar, typename Derived>
Matrix<Scalar> spmm_transposed(const CsrMatrix<Scalar>& m, const Eigen::MatrixBase<Derived>& x,
                               std::span<const Scalar> scale = {}) {
  if (x.rows() != m.n_rows)
    throw Error(ErrorCode::DimensionMismatch, "spmm_transposed: operand rows != n_rows");
  if (!scale.empty() && static_cast<int>(scale.size()) != m.nnz())
    throw Error(ErrorCode::MisalignedMask, "spmm_transposed: scale length differs from nnz");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(m.n_cols, x.cols());
  for (int r = 0; r < m.n_rows; ++r)
    for (int p = m.row_offsets[r]; p < m.row_offsets[r + 1]; ++p) {
      const Scalar w = scale.empty() ? m.values[p] : m.values[p] * scale[p];
      out.row(m.col_indices[p]) += w * x.row(r);
    }
  return out;
}

template <typename Scalar>
CsrMatrix<Scalar> transpose(const CsrMatrix<Scalar>& m) {
  std::vector<Edge> edges;
  std::vector<Scalar> vals;
  edges.reserve(m.nnz());
  vals.reserve(m.nnz());
  m.for_each([&](int, int r, int c, Scalar v) {
    edges.emplace_back(c, r);
    vals.push_back(v);
  });
  return build_csr<Scalar>(edges, m.n_cols, m.n_rows, vals);
}

template <typename Scalar>
Matrix<Scalar> to_dense(const CsrMatrix<Scalar>& m) {
  Matrix<Scalar> d = Matrix<Scalar>::Zero(m.n_rows, m.n_cols);
  m.for_each([&](int, int r, int c, Scalar v) { d(r, c) = v; });
  return d;
}

}  // namespace ingrex
