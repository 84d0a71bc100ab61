#include "ingrex/checkpoint.hpp"

#include <fstream>

namespace ingrex {

namespace {

using json = nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, int n_rows, int n_cols) {
  if (static_cast<int>(rows.size()) != n_rows)
    throw Error(ErrorCode::ParseError, "checkpoint: weight matrix has the wrong row count");
  Eigen::MatrixXd m(n_rows, n_cols);
  for (int r = 0; r < n_rows; ++r) {
    if (static_cast<int>(rows[r].size()) != n_cols)
      throw Error(ErrorCode::ParseError, "checkpoint: weight matrix has the wrong column count");
    for (int c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

Eigen::RowVectorXd row_from(const json& v, int n) {
  if (static_cast<int>(v.size()) != n) throw Error(ErrorCode::ParseError, "checkpoint: bias has the wrong length");
  Eigen::RowVectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = v[i].get<double>();
  return out;
}

struct LayerRecord {
  Eigen::MatrixXd weight;
  Eigen::RowVectorXd bias;
  Activation activation;
};

json layers_json(const std::vector<LayerRecord>& layers) {
  json dims = json::array(), acts = json::array(), weights = json::array(), biases = json::array();
  if (!layers.empty()) dims.push_back(layers.front().weight.rows());
  for (const auto& l : layers) {
    dims.push_back(l.weight.cols());
    acts.push_back(to_string(l.activation));
    weights.push_back(matrix_json(l.weight));
    biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
  }
  return {{"layer_dims", dims}, {"activations", acts}, {"weights", weights}, {"biases", biases}};
}

std::vector<LayerRecord> layers_from(const json& j) {
  const auto dims = j.at("layer_dims").get<std::vector<int>>();
  const auto& acts = j.at("activations");
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (dims.size() < 2 || acts.size() + 1 != dims.size() || weights.size() != acts.size() ||
      biases.size() != acts.size())
    throw Error(ErrorCode::ParseError, "checkpoint: layer_dims, activations, weights and biases disagree");
  std::vector<LayerRecord> out;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k)
    out.push_back({matrix_from(weights[k], dims[k], dims[k + 1]), row_from(biases[k], dims[k + 1]),
                   activation_from_string(acts[k].get<std::string>())});
  return out;
}

json meta_json(const CheckpointMeta& meta) {
  return {{"seed", meta.seed}, {"epochs", meta.epochs}, {"dataset_id", meta.dataset_id}};
}

void expect_kind(const json& j, const std::string& kind) {
  const auto actual = j.at("kind").get<std::string>();
  if (actual != kind) throw Error(ErrorCode::IncompatibleModel, "checkpoint kind '" + actual + "' is not '" + kind + "'");
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("checkpoint: ") + e.what());
  }
}

json gcn_body(const GcnModel& model) {
  std::vector<LayerRecord> layers;
  for (const auto& l : model.layers) layers.push_back({l.weight, l.bias, l.activation});
  if (model.readout) layers.push_back({model.readout->weight, model.readout->bias, model.readout->activation});
  json j = layers_json(layers);
  j["task"] = to_string(model.task);
  j["readout"] = model.readout.has_value();
  return j;
}

GcnModel gcn_body_from(const json& j) {
  GcnModel m;
  m.task = task_from_string(j.at("task").get<std::string>());
  auto layers = layers_from(j);
  if (j.at("readout").get<bool>()) {
    auto& r = layers.back();
    m.readout = DenseLayer{r.weight, r.bias, r.activation};
    layers.pop_back();
  }
  for (auto& l : layers) m.layers.push_back({std::move(l.weight), std::move(l.bias), l.activation});
  m.validate();
  return m;
}

}  // namespace


json to_checkpoint(const MlpParams& mlp) {
  std::vector<LayerRecord> layers;
  for (const auto& l : mlp.layers) layers.push_back({l.weight, l.bias, l.activation});
  json j = layers_json(layers);
  j["kind"] = "mlp";
  return j;
}

MlpParams mlp_from_checkpoint(const json& j) {
  return guarded([&] {
    MlpParams p;
    for (auto& l : layers_from(j)) p.layers.push_back({std::move(l.weight), std::move(l.bias), l.activation});
    p.validate();
    return p;
  });
}

json to_checkpoint(const GcnModel& model, const CheckpointMeta& meta) {
  json j = gcn_body(model);
  j["kind"] = "gcn";
  j["meta"] = meta_json(meta);
  return j;
}

GcnModel gcn_from_checkpoint(const json& j) {
  return guarded([&] {
    expect_kind(j, "gcn");
    return gcn_body_from(j);
  });
}

json to_checkpoint(const SelfExplainableGcn& model, const CheckpointMeta& meta) {
  json j = gcn_body(model.base);
  j["kind"] = "self_explainable_gcn";
  j["meta"] = meta_json(meta);
  j["embedder"] = to_checkpoint(model.embedder, meta);
  j["mask_mlp"] = to_checkpoint(model.mask_mlp);
  return j;
}

SelfExplainableGcn self_explainable_from_checkpoint(const json& j) {
  return guarded([&] {
    expect_kind(j, "self_explainable_gcn");
    SelfExplainableGcn m{gcn_from_checkpoint(j.at("embedder")), gcn_body_from(j),
                         mlp_from_checkpoint(j.at("mask_mlp"))};
    m.validate();
    return m;
  });
}

json to_checkpoint(const SurrogateBundle& bundle, const CheckpointMeta& meta) {
  json j = to_checkpoint(bundle.student);
  j["kind"] = "mlp_surrogate";
  j["meta"] = meta_json(meta);
  j["meta"]["dataset_id"] = bundle.dataset_id;
  j["fidelity"] = bundle.fidelity;
  j["temperature"] = bundle.temperature;
  return j;
}

SurrogateBundle surrogate_from_checkpoint(const json& j) {
  return guarded([&] {
    expect_kind(j, "mlp_surrogate");
    SurrogateBundle b;
    b.student = mlp_from_checkpoint(j);
    b.fidelity = j.at("fidelity").get<double>();
    b.temperature = j.value("temperature", 2.0);
    b.dataset_id = j.at("meta").at("dataset_id").get<std::string>();
    return b;
  });
}

CheckpointMeta meta_from_checkpoint(const json& j) {
  return guarded([&] {
    const auto& m = j.at("meta");
    return CheckpointMeta{m.at("seed").get<std::uint64_t>(), m.at("epochs").get<int>(),
                          m.at("dataset_id").get<std::string>()};
  });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "no such file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what() + " (byte " +
                                           std::to_string(e.byte) + ")");
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::NotFound, "cannot write " + path.string());
}

}  // namespace ingrex
