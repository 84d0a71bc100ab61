#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ingrex/structural.hpp"

namespace ingrex {

/// One embedding row per graph, labelled with the model's predicted class.
struct EmbeddingIndex {
  Eigen::MatrixXd vectors;
  std::vector<int> labels;
  std::vector<int> item_ids;

  int size() const { return static_cast<int>(item_ids.size()); }
};

/// Mean-pooled final-layer node embeddings of the unmasked model.
EmbeddingIndex build_index(const GcnModel& model, const DatasetBundle& dataset);
/// Same, for the self-explainable student running under its learned mask.
EmbeddingIndex build_index(const SelfExplainableGcn& model, const DatasetBundle& dataset);

struct Neighbor {
  int item_id = -1;
  double distance = 0.0;
};

/// Euclidean nearest neighbour of `query_id` among items whose label equals
/// (same_class) or differs from the query's, excluding the query itself.
/// Ties go to the smaller item id.
Neighbor find_nearest(const EmbeddingIndex& index, int query_id, bool same_class);

struct Reference {
  Neighbor neighbor;
  GraphExplanation explanation;
};

struct ReferenceSet {
  int query_id = 0;
  Reference same_class;
  Reference diff_class;
};

ReferenceSet find_references(const EmbeddingIndex& index, int query_id, const SelfExplainableGcn& model,
                             const DatasetBundle& dataset, const SelectionStrategy& strategy);

}  // namespace ingrex
