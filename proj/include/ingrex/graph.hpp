#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ingrex/sparse.hpp"

namespace ingrex {

struct Graph {
  int node_count = 0;
  /// Undirected graphs list each edge once; adjacency() emits both directions.
  std::vector<Edge> edges;
  bool directed = false;
  Eigen::MatrixXd features;
  std::optional<std::vector<int>> node_labels;
  std::optional<int> graph_label;
  /// Motif edges for synthetic benchmarks, in the same orientation as `edges`.
  std::vector<Edge> ground_truth_edges;

  int feature_dim() const { return static_cast<int>(features.cols()); }
};

enum class Task { NodeClassification, GraphClassification };

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

struct DatasetBundle {
  std::string id;
  Task task = Task::NodeClassification;
  std::vector<Graph> graphs;
  int num_classes = 0;
  /// Node indices for node classification, graph indices otherwise.
  Split split;

  int feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
};

/// Throws if any invariant of the graph is violated.
void validate(const Graph& g, int num_classes);
void validate(const DatasetBundle& d);

/// Directed edge list with undirected edges expanded to both directions.
std::vector<Edge> directed_edges(const Graph& g);

/// Unweighted adjacency; entry (i, j) is the edge i -> j.
CsrMatrix<double> adjacency(const Graph& g);

enum class NormMode { ColumnNormalized, Symmetric };

struct NormalizedAdjacency {
  CsrMatrix<double> matrix;
  NormMode mode = NormMode::Symmetric;
};

/// Row-normalizes a weighted adjacency and transposes it. Rows without
/// outgoing weight receive a self-loop first, so every column sums to one.
NormalizedAdjacency column_normalize(const CsrMatrix<double>& weighted_adjacency);

NormalizedAdjacency column_normalized_adjacency(const Graph& g);

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
NormalizedAdjacency sym_normalized_adjacency(const Graph& g);

}  // namespace ingrex
