#include "ingrex/layout.hpp"

namespace ingrex {

LayoutResult layout_embeddings(const GcnModel& model, const Graph& g) {
  if (model.input_dim() != g.feature_dim())
    throw Error(ErrorCode::IncompatibleModel, "layout: model expects " + std::to_string(model.input_dim()) +
                                                  " features, graph has " + std::to_string(g.feature_dim()));
  const auto fwd = gcn_forward(model, sym_normalized_adjacency(g), g.features);
  return {pca_2d(fwd.embeddings(model))};
}

}  // namespace ingrex
