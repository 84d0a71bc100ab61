#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "ingrex/graph.hpp"

namespace ingrex {

/// Balanced binary tree with `depth` levels and `num_grids` 3x3 grids, each
/// hung off a uniformly chosen tree node by one edge. Label 0 marks tree
/// nodes, label 1 grid nodes; grid edges are the ground truth.
///
/// Features (4 columns): constant 1, degree / 4, and two standard normal
/// noise columns.
DatasetBundle generate_tree_grid(int depth, int num_grids, std::uint64_t seed);

/// Barabasi-Albert base graphs (one attachment per new node) each carrying
/// a house motif (label 0) or a 5-cycle motif (label 1). Node features are a
/// constant 10-dim vector of 0.1.
DatasetBundle generate_ba2motifs(int num_graphs, int base_size, std::uint64_t seed);

/// Shuffled split of `count` indices with the given train / val fractions.
Split random_split(int count, double train_fraction, double val_fraction, std::uint64_t seed);

nlohmann::json to_json(const DatasetBundle& d);
DatasetBundle dataset_from_json(const nlohmann::json& j, std::string id);

/// Dataset id is the file stem.
DatasetBundle load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const DatasetBundle& d);

std::string to_string(Task task);
Task task_from_string(const std::string& s);

}  // namespace ingrex
