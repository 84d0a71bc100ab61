#include "ingrex/structural.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace ingrex {

namespace {

std::vector<int> bfs_hops(int n, const std::vector<Edge>& directed, NodeId source) {
  std::vector<std::vector<int>> out(n);
  for (const auto& [s, t] : directed) out[s].push_back(t);
  std::vector<int> hop(n, -1);
  std::queue<int> q;
  hop[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : out[v])
      if (hop[w] < 0) {
        hop[w] = hop[v] + 1;
        q.push(w);
      }
  }
  return hop;
}

/// Ranking by value descending, ties by ascending index.
std::vector<int> rank_desc(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

}  // namespace

NormalizedAdjacency mask_weighted_adjacency(const Graph& g, const NormalizedAdjacency& sym, const EdgeMask& mask) {
  if (sym.matrix.n_rows != g.node_count || static_cast<int>(mask.values.size()) != sym.matrix.nnz())
    throw Error(ErrorCode::MisalignedMask, "mask_weighted_adjacency: mask does not belong to this graph");
  const auto edges = directed_edges(g);
  std::vector<double> weights;
  weights.reserve(edges.size());
  for (const auto& [s, t] : edges) {
    const int p = sym.matrix.find(s, t);
    if (p < 0) throw Error(ErrorCode::MisalignedMask, "mask_weighted_adjacency: edge missing from adjacency");
    weights.push_back(mask.values[p]);
  }
  return column_normalize(build_csr<double>(edges, g.node_count, g.node_count, weights));
}

NodeExplanation explain_node(const Graph& g, const NormalizedAdjacency& adj, NodeId target,
                             const RwrConfig& config) {
  config.validate();
  const int n = g.node_count;
  if (target < 0 || target >= n)
    throw Error(ErrorCode::TargetOutOfRange, "node " + std::to_string(target) + " is not in [0, " +
                                                 std::to_string(n) + ")");
  if (adj.mode != NormMode::ColumnNormalized || adj.matrix.n_rows != n)
    throw Error(ErrorCode::DimensionMismatch, "explain_node: expected the column-normalized adjacency of the graph");

  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(n);
  r0[target] = 1.0;
  const auto walk = rwr(adj.matrix, r0, config);
  const Eigen::VectorXd& r = walk.scores;

  // Nodes the walk never reaches carry no evidence and are left out.
  std::vector<int> chosen;
  for (int v : rank_desc(std::span<const double>(r.data(), static_cast<std::size_t>(n)))) {
    if (static_cast<int>(chosen.size()) == config.top_k) break;
    if (r[v] > 0.0 || v == target) chosen.push_back(v);
  }
  if (std::find(chosen.begin(), chosen.end(), target) == chosen.end()) chosen.back() = target;
  std::stable_sort(chosen.begin(), chosen.end(), [&](int a, int b) { return r[a] > r[b] || (r[a] == r[b] && a < b); });

  const auto directed = directed_edges(g);
  const auto hops = bfs_hops(n, directed, target);
  std::vector<char> in_subgraph(n, 0);
  for (int v : chosen) in_subgraph[v] = 1;

  NodeExplanation out;
  out.target = target;
  out.converged = walk.converged;
  out.iterations_used = walk.iterations_used;
  for (int v : chosen) out.nodes.push_back({v, r[v], hops[v]});

  std::vector<double> inflow(n, 0.0);
  for (const auto& [s, t] : directed)
    if (in_subgraph[s] && in_subgraph[t]) {
      const double c = adj.matrix.coeff(t, s) * r[s];
      out.edges.push_back({s, t, c});
      inflow[t] += c;
    }
  for (auto& e : out.edges)
    if (inflow[e.dst] > 0.0) e.contribution /= inflow[e.dst];
  std::sort(out.edges.begin(), out.edges.end(),
            [](const auto& a, const auto& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
  return out;
}

std::vector<double> edge_scores(const Graph& g, const NormalizedAdjacency& sym, const EdgeMask& mask) {
  if (static_cast<int>(mask.values.size()) != sym.matrix.nnz())
    throw Error(ErrorCode::MisalignedMask, "edge_scores: mask not aligned with adjacency");
  std::vector<double> scores;
  scores.reserve(g.edges.size());
  for (const auto& [s, t] : g.edges) {
    const int fwd = sym.matrix.find(s, t);
    const int back = g.directed ? -1 : sym.matrix.find(t, s);
    if (fwd < 0) throw Error(ErrorCode::MisalignedMask, "edge_scores: edge missing from adjacency");
    scores.push_back(back < 0 || back == fwd ? mask.values[fwd] : 0.5 * (mask.values[fwd] + mask.values[back]));
  }
  return scores;
}

std::vector<int> select_edges(std::span<const double> scores, const SelectionStrategy& strategy) {
  std::vector<int> picked;
  if (const auto* top = std::get_if<TopK>(&strategy)) {
    if (top->k < 0) throw Error(ErrorCode::InvalidConfig, "top_k must be >= 0");
    const auto order = rank_desc(scores);
    picked.assign(order.begin(), order.begin() + std::min<std::size_t>(order.size(), top->k));
    std::sort(picked.begin(), picked.end());
  } else {
    const double t = std::get<Threshold>(strategy).t;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] > t) picked.push_back(static_cast<int>(i));
  }
  return picked;
}

std::vector<Edge> GraphExplanation::selected_edges() const {
  std::vector<Edge> out;
  for (const auto& e : edges)
    if (e.selected) out.emplace_back(e.src, e.dst);
  return out;
}

GraphExplanation explain_graph(const SelfExplainableGcn& model, const Graph& g, int graph_id,
                               const SelectionStrategy& strategy) {
  if (model.base.task != Task::GraphClassification || model.base.input_dim() != g.feature_dim())
    throw Error(ErrorCode::IncompatibleModel, "explain_graph: model does not accept this graph");
  const auto sym = sym_normalized_adjacency(g);
  const auto mask = model_edge_mask(model, sym, g.features);
  const Eigen::VectorXd probs = softmax(Eigen::VectorXd(masked_gcn_forward(model, sym, g.features, mask).row(0).transpose()));

  GraphExplanation out;
  out.graph_id = graph_id;
  out.strategy = strategy;
  out.class_probs.assign(probs.data(), probs.data() + probs.size());
  Eigen::Index arg = 0;
  probs.maxCoeff(&arg);
  out.predicted_class = static_cast<int>(arg);

  const auto scores = edge_scores(g, sym, mask);
  for (std::size_t i = 0; i < scores.size(); ++i) out.edges.push_back({g.edges[i].first, g.edges[i].second, scores[i], false});
  for (int i : select_edges(scores, strategy)) out.edges[i].selected = true;
  return out;
}

}  // namespace ingrex
