#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ingrex/distill.hpp"
#include "ingrex/datasets.hpp"
#include "ingrex/gcn.hpp"

namespace ingrex {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  std::string dataset_id;
};

// Checkpoint layout (JSON):
//   {"kind", "layer_dims", "activations", "weights", "biases", "meta"}
// with weights as row-major nested arrays (in x out per layer). GCN
// checkpoints add "task" and "readout" (true when the last entry is the
// dense graph-level head). Self-explainable checkpoints nest the frozen
// teacher under "embedder" and the mask network under "mask_mlp".
// Surrogates add "fidelity" and "temperature".

nlohmann::json to_checkpoint(const GcnModel& model, const CheckpointMeta& meta);
nlohmann::json to_checkpoint(const SelfExplainableGcn& model, const CheckpointMeta& meta);
nlohmann::json to_checkpoint(const SurrogateBundle& bundle, const CheckpointMeta& meta);
nlohmann::json to_checkpoint(const MlpParams& mlp);

GcnModel gcn_from_checkpoint(const nlohmann::json& j);
SelfExplainableGcn self_explainable_from_checkpoint(const nlohmann::json& j);
SurrogateBundle surrogate_from_checkpoint(const nlohmann::json& j);
MlpParams mlp_from_checkpoint(const nlohmann::json& j);
CheckpointMeta meta_from_checkpoint(const nlohmann::json& j);

/// Reads and parses a JSON file. Missing files raise NotFound; malformed
/// JSON raises ParseError carrying the byte position.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ingrex
