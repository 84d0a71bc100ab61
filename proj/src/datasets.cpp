#include "ingrex/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace ingrex {

namespace {

using json = nlohmann::json;

void add_grid(Graph& g, int origin) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int v = origin + 3 * r + c;
      if (c < 2) g.ground_truth_edges.emplace_back(v, v + 1);
      if (r < 2) g.ground_truth_edges.emplace_back(v, v + 3);
    }
}

}  // namespace

Split random_split(int count, double train_fraction, double val_fraction, std::uint64_t seed) {
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const int n_train = static_cast<int>(train_fraction * count);
  const int n_val = static_cast<int>(val_fraction * count);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

DatasetBundle generate_tree_grid(int depth, int num_grids, std::uint64_t seed) {
  if (depth < 2 || num_grids < 1)
    throw Error(ErrorCode::InvalidParams, "tree_grid: need depth >= 2 and num_grids >= 1");
  std::mt19937_64 rng(seed);
  const int tree_nodes = (1 << depth) - 1;
  Graph g;
  g.node_count = tree_nodes + 9 * num_grids;
  for (int v = 1; v < tree_nodes; ++v) g.edges.emplace_back((v - 1) / 2, v);

  std::uniform_int_distribution<int> pick(0, tree_nodes - 1);
  for (int k = 0; k < num_grids; ++k) {
    const int origin = tree_nodes + 9 * k;
    const auto before = g.ground_truth_edges.size();
    add_grid(g, origin);
    g.edges.insert(g.edges.end(), g.ground_truth_edges.begin() + before, g.ground_truth_edges.end());
    g.edges.emplace_back(pick(rng), origin);
  }

  std::vector<int> labels(g.node_count, 0);
  std::fill(labels.begin() + tree_nodes, labels.end(), 1);
  g.node_labels = std::move(labels);

  std::vector<int> degree(g.node_count, 0);
  for (const auto& [s, d] : g.edges) ++degree[s], ++degree[d];
  std::normal_distribution<double> noise(0.0, 1.0);
  g.features.resize(g.node_count, 4);
  for (int v = 0; v < g.node_count; ++v) {
    g.features(v, 0) = 1.0;
    g.features(v, 1) = degree[v] / 4.0;
    g.features(v, 2) = noise(rng);
    g.features(v, 3) = noise(rng);
  }

  DatasetBundle d;
  d.id = "tree_grid";
  d.task = Task::NodeClassification;
  d.num_classes = 2;
  d.split = random_split(g.node_count, 0.6, 0.2, seed ^ 0x9e3779b97f4a7c15ULL);
  d.graphs.push_back(std::move(g));
  return d;
}

DatasetBundle generate_ba2motifs(int num_graphs, int base_size, std::uint64_t seed) {
  if (num_graphs < 2 || num_graphs % 2 != 0 || base_size < 5)
    throw Error(ErrorCode::InvalidParams, "ba2motifs: need an even num_graphs >= 2 and base_size >= 5");
  static constexpr Edge kHouse[] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 4}, {1, 4}};
  static constexpr Edge kCycle[] = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};

  std::mt19937_64 rng(seed);
  DatasetBundle d;
  d.id = "ba2motifs";
  d.task = Task::GraphClassification;
  d.num_classes = 2;
  for (int k = 0; k < num_graphs; ++k) {
    Graph g;
    g.node_count = base_size + 5;
    // Preferential attachment: `ends` lists every edge endpoint, so a
    // uniform draw from it is proportional to degree.
    std::vector<int> ends{0, 1};
    g.edges.emplace_back(0, 1);
    for (int v = 2; v < base_size; ++v) {
      std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
      const int u = ends[pick(rng)];
      g.edges.emplace_back(u, v);
      ends.push_back(u);
      ends.push_back(v);
    }
    const int label = k % 2;
    const std::span<const Edge> motif = label == 0 ? std::span<const Edge>(kHouse)
                                                   : std::span<const Edge>(kCycle);
    for (const auto& [a, b] : motif) g.ground_truth_edges.emplace_back(base_size + a, base_size + b);
    g.edges.insert(g.edges.end(), g.ground_truth_edges.begin(), g.ground_truth_edges.end());
    std::uniform_int_distribution<int> anchor(0, base_size - 1);
    g.edges.emplace_back(anchor(rng), base_size);

    g.features = Eigen::MatrixXd::Constant(g.node_count, 10, 0.1);
    g.graph_label = label;
    d.graphs.push_back(std::move(g));
  }
  d.split = random_split(num_graphs, 0.8, 0.1, seed ^ 0x9e3779b97f4a7c15ULL);
  return d;
}

std::string to_string(Task task) {
  return task == Task::NodeClassification ? "node_classification" : "graph_classification";
}

Task task_from_string(const std::string& s) {
  if (s == "node_classification") return Task::NodeClassification;
  if (s == "graph_classification") return Task::GraphClassification;
  throw Error(ErrorCode::ParseError, "unknown task '" + s + "'");
}

json to_json(const DatasetBundle& d) {
  json graphs = json::array();
  for (const auto& g : d.graphs) {
    json edges = json::array();
    for (const auto& [s, t] : g.edges) edges.push_back({s, t});
    json features = json::array();
    for (int r = 0; r < g.features.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < g.features.cols(); ++c) row.push_back(g.features(r, c));
      features.push_back(std::move(row));
    }
    json jg = {{"num_nodes", g.node_count},
               {"edges", std::move(edges)},
               {"directed", g.directed},
               {"features", std::move(features)}};
    if (g.node_labels) jg["node_labels"] = *g.node_labels;
    if (g.graph_label) jg["graph_label"] = *g.graph_label;
    if (!g.ground_truth_edges.empty()) {
      json gt = json::array();
      for (const auto& [s, t] : g.ground_truth_edges) gt.push_back({s, t});
      jg["ground_truth_edges"] = std::move(gt);
    }
    graphs.push_back(std::move(jg));
  }
  return {{"task", to_string(d.task)},
          {"num_classes", d.num_classes},
          {"graphs", std::move(graphs)},
          {"split", {{"train", d.split.train}, {"val", d.split.val}, {"test", d.split.test}}}};
}

DatasetBundle dataset_from_json(const json& j, std::string id) {
  DatasetBundle d;
  d.id = std::move(id);
  try {
    d.task = task_from_string(j.at("task").get<std::string>());
    d.num_classes = j.at("num_classes").get<int>();
    for (const auto& jg : j.at("graphs")) {
      Graph g;
      g.node_count = jg.at("num_nodes").get<int>();
      for (const auto& e : jg.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      g.directed = jg.value("directed", false);
      const auto& rows = jg.at("features");
      const int dim = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
      g.features.resize(static_cast<Eigen::Index>(rows.size()), dim);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != dim)
          throw Error(ErrorCode::ParseError, "dataset: ragged feature matrix");
        for (int c = 0; c < dim; ++c) g.features(static_cast<Eigen::Index>(r), c) = rows[r][c].get<double>();
      }
      if (jg.contains("node_labels")) g.node_labels = jg["node_labels"].get<std::vector<int>>();
      if (jg.contains("graph_label")) g.graph_label = jg["graph_label"].get<int>();
      if (jg.contains("ground_truth_edges"))
        for (const auto& e : jg["ground_truth_edges"])
          g.ground_truth_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      d.graphs.push_back(std::move(g));
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      d.split.train = s.value("train", std::vector<int>{});
      d.split.val = s.value("val", std::vector<int>{});
      d.split.test = s.value("test", std::vector<int>{});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("dataset: ") + e.what());
  }
  validate(d);
  return d;
}

DatasetBundle load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "dataset file not found: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
  return dataset_from_json(j, path.stem().string());
}

void save_dataset(const std::filesystem::path& path, const DatasetBundle& d) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << to_json(d).dump() << '\n';
  if (!out) throw Error(ErrorCode::NotFound, "cannot write " + path.string());
}

}  // namespace ingrex
