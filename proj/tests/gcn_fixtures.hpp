#pragma once

#include <random>

#include "ingrex/gcn.hpp"
#include "test_util.hpp"

namespace ingrex::testing {

/// Dense oracle for one forward pass: H' = act(S H W + b) with S dense.
inline Eigen::MatrixXd dense_gcn_logits(const GcnModel& m, const Eigen::MatrixXd& s, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd h = x;
  for (const auto& layer : m.layers) {
    Eigen::MatrixXd z = s * h * layer.weight;
    z.rowwise() += layer.bias;
    h = apply_activation(z, layer.activation);
  }
  if (!m.readout) return h;
  const Eigen::RowVectorXd pooled = h.colwise().mean();
  return pooled * m.readout->weight + m.readout->bias;
}

/// Random node-classification bundle on one graph; every node is in train.
inline DatasetBundle random_node_dataset(int n, int feature_dim, int classes, std::mt19937_64& rng) {
  DatasetBundle d;
  d.id = "random_nodes";
  d.task = Task::NodeClassification;
  d.num_classes = classes;
  Graph g = random_graph(n, 0.6, false, feature_dim, rng);
  std::uniform_int_distribution<int> label(0, classes - 1);
  std::vector<int> labels(n);
  for (auto& y : labels) y = label(rng);
  g.node_labels = labels;
  d.graphs.push_back(std::move(g));
  for (int i = 0; i < n; ++i) d.split.train.push_back(i);
  return d;
}

inline DatasetBundle random_graph_dataset(int graphs, int n, int feature_dim, int classes, std::mt19937_64& rng) {
  DatasetBundle d;
  d.id = "random_graphs";
  d.task = Task::GraphClassification;
  d.num_classes = classes;
  std::uniform_int_distribution<int> label(0, classes - 1);
  for (int k = 0; k < graphs; ++k) {
    Graph g = random_graph(n, 0.6, false, feature_dim, rng);
    g.graph_label = label(rng);
    d.graphs.push_back(std::move(g));
    d.split.train.push_back(k);
  }
  return d;
}

/// Two communities whose features reveal the class (one-hot plus noise).
inline DatasetBundle separable_node_dataset(int per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution intra(0.3), inter(0.02);
  std::normal_distribution<double> noise(0.0, 0.3);
  const int n = 2 * per_class;
  Graph g;
  g.node_count = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < per_class) == (j < per_class);
      if (same ? intra(rng) : inter(rng)) g.edges.emplace_back(i, j);
    }
  g.features.resize(n, 6);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i < per_class ? 0 : 1;
    for (int c = 0; c < 6; ++c) g.features(i, c) = noise(rng);
    g.features(i, labels[i]) += 1.0;
  }
  g.node_labels = labels;
  DatasetBundle d;
  d.id = "separable";
  d.task = Task::NodeClassification;
  d.num_classes = 2;
  d.graphs.push_back(std::move(g));
  std::mt19937_64 split_rng(seed + 1);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), split_rng);
  d.split.train.assign(idx.begin(), idx.begin() + n / 2);
  d.split.val.assign(idx.begin() + n / 2, idx.begin() + 3 * n / 4);
  d.split.test.assign(idx.begin() + 3 * n / 4, idx.end());
  return d;
}

}  // namespace ingrex::testing
