#pragma once

#include <json.hpp>

#include "ingrex/layout.hpp"
#include "ingrex/references.hpp"
#include "ingrex/shapley.hpp"
#include "ingrex/structural.hpp"

namespace ingrex {

// JSON wire formats shared by the HTTP service and the CLI.

nlohmann::json to_json(const NodeExplanation& e);
nlohmann::json to_json(const GraphExplanation& e);
nlohmann::json to_json(const FeatureAttribution& a);
nlohmann::json to_json(const AttributionSummary& s);
nlohmann::json to_json(const ReferenceSet& r);
nlohmann::json to_json(const SelectionStrategy& s);

/// Graph payload for the global view; positions are included when given.
nlohmann::json graph_view_json(const std::string& dataset_id, int graph_id, const Graph& g,
                               const LayoutResult* layout);

}  // namespace ingrex
