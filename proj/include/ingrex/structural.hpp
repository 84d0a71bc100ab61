#pragma once

#include <variant>
#include <vector>

#include "ingrex/gcn.hpp"
#include "ingrex/rwr.hpp"

namespace ingrex {

struct ScoredNode {
  NodeId id = 0;
  double score = 0.0;
  int hop = -1;  // BFS distance from the target along walk direction; -1 if unreachable
};

struct ContributionEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double contribution = 0.0;
};

struct NodeExplanation {
  NodeId target = 0;
  std::vector<ScoredNode> nodes;  // score descending, ties by id
  std::vector<ContributionEdge> edges;
  bool converged = false;
  int iterations_used = 0;
};

/// Column-normalized adjacency whose edge weights are the learned mask:
/// edge i -> j is weighted by the mask entry of (i, j) in `sym`.
NormalizedAdjacency mask_weighted_adjacency(const Graph& g, const NormalizedAdjacency& sym, const EdgeMask& mask);

/// RWR from a one-hot restart at `target`, top-k nodes (target always kept),
/// and the induced edges. Edge j -> i carries A[i, j] * r_j, normalized over
/// the induced in-edges of i so the inflow of every node sums to one.
NodeExplanation explain_node(const Graph& g, const NormalizedAdjacency& adj, NodeId target,
                             const RwrConfig& config = {});

struct TopK {
  int k = 1;
};
struct Threshold {
  double t = 0.5;
};
using SelectionStrategy = std::variant<TopK, Threshold>;

struct ScoredEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double score = 0.0;
  bool selected = false;
};

struct GraphExplanation {
  int graph_id = 0;
  int predicted_class = 0;
  std::vector<double> class_probs;
  std::vector<ScoredEdge> edges;  // same order as Graph::edges
  SelectionStrategy strategy = TopK{};

  std::vector<Edge> selected_edges() const;
};

/// Per-edge scores: the mean of the two directed mask entries for undirected
/// edges, the single entry for directed ones.
std::vector<double> edge_scores(const Graph& g, const NormalizedAdjacency& sym, const EdgeMask& mask);

/// Indices selected by the strategy. Top-k ranks by score descending, ties by
/// index; threshold keeps scores strictly above t.
std::vector<int> select_edges(std::span<const double> scores, const SelectionStrategy& strategy);

GraphExplanation explain_graph(const SelfExplainableGcn& model, const Graph& g, int graph_id,
                               const SelectionStrategy& strategy);

}  // namespace ingrex
