#include "ingrex/graph.hpp"

#include <cmath>
#include <set>

namespace ingrex {

void validate(const Graph& g, int num_classes) {
  if (g.node_count < 0) throw Error(ErrorCode::InvalidParams, "graph: negative node_count");
  for (const auto& [s, d] : g.edges)
    if (s < 0 || s >= g.node_count || d < 0 || d >= g.node_count)
      throw Error(ErrorCode::OutOfRange, "graph: edge (" + std::to_string(s) + "," +
                                             std::to_string(d) + ") outside node range");
  if (g.features.rows() != g.node_count)
    throw Error(ErrorCode::DimensionMismatch, "graph: feature rows " +
                                                  std::to_string(g.features.rows()) +
                                                  " != node_count " + std::to_string(g.node_count));
  if (!g.features.allFinite()) throw Error(ErrorCode::InvalidParams, "graph: non-finite feature");
  if (g.node_labels) {
    if (static_cast<int>(g.node_labels->size()) != g.node_count)
      throw Error(ErrorCode::DimensionMismatch, "graph: node_labels length != node_count");
    for (int y : *g.node_labels)
      if (y < 0 || y >= num_classes)
        throw Error(ErrorCode::OutOfRange, "graph: node label " + std::to_string(y) + " not a class");
  }
  if (g.graph_label && (*g.graph_label < 0 || *g.graph_label >= num_classes))
    throw Error(ErrorCode::OutOfRange, "graph: graph label not a class");
}

void validate(const DatasetBundle& d) {
  if (d.num_classes < 1) throw Error(ErrorCode::InvalidParams, "dataset: num_classes < 1");
  if (d.task == Task::NodeClassification && d.graphs.size() != 1)
    throw Error(ErrorCode::InvalidParams, "dataset: node classification needs exactly one graph");
  for (const auto& g : d.graphs) {
    validate(g, d.num_classes);
    if (g.feature_dim() != d.feature_dim())
      throw Error(ErrorCode::DimensionMismatch, "dataset: graphs disagree on feature dim");
    if (d.task == Task::NodeClassification && !g.node_labels)
      throw Error(ErrorCode::InvalidParams, "dataset: node classification graph without labels");
    if (d.task == Task::GraphClassification && !g.graph_label)
      throw Error(ErrorCode::InvalidParams, "dataset: graph classification graph without label");
  }
  const int limit = d.task == Task::NodeClassification
                        ? (d.graphs.empty() ? 0 : d.graphs.front().node_count)
                        : static_cast<int>(d.graphs.size());
  std::set<int> seen;
  for (const auto* part : {&d.split.train, &d.split.val, &d.split.test})
    for (int i : *part) {
      if (i < 0 || i >= limit)
        throw Error(ErrorCode::OutOfRange, "dataset: split index " + std::to_string(i) + " invalid");
      if (!seen.insert(i).second)
        throw Error(ErrorCode::InvalidParams, "dataset: split index " + std::to_string(i) +
                                                  " appears twice");
    }
}

std::vector<Edge> directed_edges(const Graph& g) {
  std::vector<Edge> out;
  out.reserve(g.edges.size() * (g.directed ? 1 : 2));
  for (const auto& [s, d] : g.edges) {
    out.emplace_back(s, d);
    if (!g.directed && s != d) out.emplace_back(d, s);
  }
  return out;
}

CsrMatrix<double> adjacency(const Graph& g) {
  const auto edges = directed_edges(g);
  return build_csr<double>(edges, g.node_count, g.node_count);
}

NormalizedAdjacency column_normalize(const CsrMatrix<double>& a) {
  if (a.n_rows == 0) throw Error(ErrorCode::EmptyGraph, "column_normalize: empty graph");
  std::vector<Edge> edges;
  std::vector<double> vals;
  for (int r = 0; r < a.n_rows; ++r) {
    double total = 0.0;
    for (int p = a.row_offsets[r]; p < a.row_offsets[r + 1]; ++p) total += a.values[p];
    if (total <= 0.0) {
      edges.emplace_back(r, r);
      vals.push_back(1.0);
      continue;
    }
    for (int p = a.row_offsets[r]; p < a.row_offsets[r + 1]; ++p) {
      edges.emplace_back(a.col_indices[p], r);
      vals.push_back(a.values[p] / total);
    }
  }
  return {build_csr<double>(edges, a.n_cols, a.n_rows, vals), NormMode::ColumnNormalized};
}

NormalizedAdjacency column_normalized_adjacency(const Graph& g) {
  if (g.node_count == 0) throw Error(ErrorCode::EmptyGraph, "column_normalized_adjacency: empty graph");
  return column_normalize(adjacency(g));
}

NormalizedAdjacency sym_normalized_adjacency(const Graph& g) {
  if (g.node_count == 0) throw Error(ErrorCode::EmptyGraph, "sym_normalized_adjacency: empty graph");
  const auto a = adjacency(g);
  std::vector<Edge> edges;
  std::vector<double> vals;
  Eigen::VectorXd degree = Eigen::VectorXd::Ones(g.node_count);
  for (int r = 0; r < a.n_rows; ++r) {
    bool has_loop = false;
    for (int p = a.row_offsets[r]; p < a.row_offsets[r + 1]; ++p) {
      const int c = a.col_indices[p];
      const double v = a.values[p] + (c == r ? 1.0 : 0.0);
      has_loop = has_loop || c == r;
      edges.emplace_back(r, c);
      vals.push_back(v);
      degree[r] += a.values[p];
    }
    if (!has_loop) {
      edges.emplace_back(r, r);
      vals.push_back(1.0);
    }
  }
  for (std::size_t k = 0; k < edges.size(); ++k)
    vals[k] /= std::sqrt(degree[edges[k].first] * degree[edges[k].second]);
  return {build_csr<double>(edges, g.node_count, g.node_count, vals), NormMode::Symmetric};
}

}  // namespace ingrex
