#include "ingrex/references.hpp"

#include <algorithm>
#include <limits>

namespace ingrex {

namespace {

void check_graph_model(const GcnModel& model, const DatasetBundle& dataset) {
  if (dataset.task != Task::GraphClassification || model.task != Task::GraphClassification ||
      model.input_dim() != dataset.feature_dim())
    throw Error(ErrorCode::IncompatibleModel, "embedding index needs a graph model matching '" + dataset.id + "'");
}

template <typename Forward>
EmbeddingIndex index_from(const DatasetBundle& dataset, int dim, Forward&& forward) {
  EmbeddingIndex index;
  index.vectors.resize(static_cast<Eigen::Index>(dataset.graphs.size()), dim);
  for (std::size_t k = 0; k < dataset.graphs.size(); ++k) {
    const GcnForward fwd = forward(dataset.graphs[k]);
    index.vectors.row(static_cast<Eigen::Index>(k)) = fwd.pooled;
    Eigen::Index arg = 0;
    fwd.logits.row(0).maxCoeff(&arg);
    index.labels.push_back(static_cast<int>(arg));
    index.item_ids.push_back(static_cast<int>(k));
  }
  return index;
}

int row_of(const EmbeddingIndex& index, int item_id) {
  const auto it = std::find(index.item_ids.begin(), index.item_ids.end(), item_id);
  if (it == index.item_ids.end())
    throw Error(ErrorCode::TargetOutOfRange, "item " + std::to_string(item_id) + " is not in the index");
  return static_cast<int>(it - index.item_ids.begin());
}

}  // namespace

EmbeddingIndex build_index(const GcnModel& model, const DatasetBundle& dataset) {
  check_graph_model(model, dataset);
  return index_from(dataset, model.embedding_dim(), [&](const Graph& g) {
    return gcn_forward(model, sym_normalized_adjacency(g), g.features);
  });
}

EmbeddingIndex build_index(const SelfExplainableGcn& model, const DatasetBundle& dataset) {
  check_graph_model(model.base, dataset);
  return index_from(dataset, model.base.embedding_dim(), [&](const Graph& g) {
    const auto adj = sym_normalized_adjacency(g);
    return gcn_forward(model.base, adj, g.features, model_edge_mask(model, adj, g.features).values);
  });
}

Neighbor find_nearest(const EmbeddingIndex& index, int query_id, bool same_class) {
  const int q = row_of(index, query_id);
  Neighbor best{-1, std::numeric_limits<double>::infinity()};
  for (int r = 0; r < index.size(); ++r) {
    if (r == q || (index.labels[r] == index.labels[q]) != same_class) continue;
    const double dist = (index.vectors.row(r) - index.vectors.row(q)).norm();
    if (dist < best.distance || (dist == best.distance && index.item_ids[r] < best.item_id))
      best = {index.item_ids[r], dist};
  }
  if (best.item_id < 0)
    throw Error(same_class ? ErrorCode::NoSameClassItem : ErrorCode::NoDiffClassItem,
                std::string("no other item with ") + (same_class ? "the same" : "a different") + " class than " +
                    std::to_string(query_id));
  return best;
}

ReferenceSet find_references(const EmbeddingIndex& index, int query_id, const SelfExplainableGcn& model,
                             const DatasetBundle& dataset, const SelectionStrategy& strategy) {
  ReferenceSet out;
  out.query_id = query_id;
  const Neighbor same = find_nearest(index, query_id, true);
  const Neighbor diff = find_nearest(index, query_id, false);
  out.same_class = {same, explain_graph(model, dataset.graphs.at(static_cast<std::size_t>(same.item_id)),
                                        same.item_id, strategy)};
  out.diff_class = {diff, explain_graph(model, dataset.graphs.at(static_cast<std::size_t>(diff.item_id)),
                                        diff.item_id, strategy)};
  return out;
}

}  // namespace ingrex
