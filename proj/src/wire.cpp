#include "ingrex/wire.hpp"

namespace ingrex {

using json = nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

json to_json(const NodeExplanation& e) {
  json nodes = json::array(), edges = json::array();
  for (const auto& n : e.nodes) nodes.push_back({{"id", n.id}, {"score", n.score}, {"hop", n.hop}});
  for (const auto& x : e.edges) edges.push_back({{"src", x.src}, {"dst", x.dst}, {"contribution", x.contribution}});
  return {{"target", e.target}, {"nodes", nodes}, {"edges", edges}, {"converged", e.converged}};
}

json to_json(const SelectionStrategy& s) {
  if (const auto* k = std::get_if<TopK>(&s)) return {{"top_k", k->k}};
  return {{"threshold", std::get<Threshold>(s).t}};
}

json to_json(const GraphExplanation& e) {
  json edges = json::array();
  for (const auto& x : e.edges)
    edges.push_back({{"src", x.src}, {"dst", x.dst}, {"score", x.score}, {"selected", x.selected}});
  return {{"graph_id", e.graph_id},
          {"predicted_class", e.predicted_class},
          {"class_probs", e.class_probs},
          {"edges", edges},
          {"strategy", to_json(e.strategy)}};
}

json to_json(const FeatureAttribution& a) {
  return {{"node_id", a.node_id},
          {"explained_class", a.explained_class},
          {"base_value", a.base_value},
          {"phi", vector_json(a.phi)},
          {"method", to_string(a.method)}};
}

json to_json(const AttributionSummary& s) {
  return {{"mean_abs_phi", vector_json(s.mean_abs_phi)}, {"ranking", s.feature_ranking}, {"sample_ids", s.sample_ids}};
}

json to_json(const ReferenceSet& r) {
  const auto ref = [](const Reference& x) {
    json j = to_json(x.explanation);
    j["distance"] = x.neighbor.distance;
    return j;
  };
  return {{"query_id", r.query_id}, {"same_class", ref(r.same_class)}, {"diff_class", ref(r.diff_class)}};
}

json graph_view_json(const std::string& dataset_id, int graph_id, const Graph& g, const LayoutResult* layout) {
  json edges = json::array();
  for (const auto& [s, t] : g.edges) edges.push_back({s, t});
  json j = {{"dataset_id", dataset_id},
            {"graph_id", graph_id},
            {"node_count", g.node_count},
            {"directed", g.directed},
            {"edges", edges},
            {"node_labels", g.node_labels ? json(*g.node_labels) : json(nullptr)},
            {"graph_label", g.graph_label ? json(*g.graph_label) : json(nullptr)}};
  if (layout) {
    json pos = json::array();
    for (Eigen::Index i = 0; i < layout->positions.rows(); ++i)
      pos.push_back({layout->positions(i, 0), layout->positions(i, 1)});
    j["layout"] = {{"method", layout->method}, {"positions", pos}};
  }
  return j;
}

}  // namespace ingrex
