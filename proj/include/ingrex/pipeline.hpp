#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ingrex/service.hpp"

namespace ingrex {

// End-to-end steps that read and write the storage layout. Each returns a
// small JSON report.

struct GenerateOptions {
  std::string kind;  // "tree_grid" or "ba2motifs"
  std::string id;    // defaults to kind
  std::uint64_t seed = 0;
  int depth = 5;
  int num_grids = 8;
  int num_graphs = 50;
  int base_size = 20;
};

nlohmann::json generate_and_save(const StorageLayout& storage, const GenerateOptions& options);

struct TrainOptions {
  /// Teacher epochs; defaults to 200 for node tasks and 2000 for graph tasks.
  std::optional<int> epochs;
  int joint_epochs = 300;
  double learning_rate = 0.01;
  double sparsity_weight = 0.1;
  std::uint64_t seed = 0;
};

/// Trains the teacher GCN and the self-explainable student, writing
/// gcn.json and self_explainable.json.
nlohmann::json train_and_save(const StorageLayout& storage, const std::string& dataset_id,
                              const TrainOptions& options);

struct DistillRunOptions {
  int epochs = 300;
  double learning_rate = 0.01;
  double temperature = 2.0;
  std::uint64_t seed = 0;
};

/// Distills the stored teacher into an MLP surrogate (surrogate.json).
nlohmann::json distill_and_save(const StorageLayout& storage, const std::string& dataset_id,
                                const DistillRunOptions& options);

}  // namespace ingrex
