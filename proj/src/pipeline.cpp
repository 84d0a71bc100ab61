#include "ingrex/pipeline.hpp"

#include "ingrex/datasets.hpp"
#include "ingrex/distill.hpp"

namespace ingrex {

using json = nlohmann::json;

namespace {

void require_valid_id(const std::string& id) {
  if (!valid_id(id)) throw Error(ErrorCode::InvalidParams, "ids may contain only letters, digits, '_' and '-'");
}

DatasetBundle load_stored(const StorageLayout& storage, const std::string& id) {
  require_valid_id(id);
  return dataset_from_json(read_json_file(storage.dataset(id)), id);
}

template <typename Model>
json accuracy_report(const Model& model, const DatasetBundle& data) {
  const PreparedDataset prep(data);
  json j = json::object();
  const auto put = [&](const char* name, const std::vector<int>& items) {
    j[name] = items.empty() ? json(nullptr) : json(accuracy(model, prep, items));
  };
  put("train", data.split.train);
  put("val", data.split.val);
  put("test", data.split.test);
  return j;
}

}  // namespace

json generate_and_save(const StorageLayout& storage, const GenerateOptions& options) {
  DatasetBundle data;
  if (options.kind == "tree_grid")
    data = generate_tree_grid(options.depth, options.num_grids, options.seed);
  else if (options.kind == "ba2motifs")
    data = generate_ba2motifs(options.num_graphs, options.base_size, options.seed);
  else
    throw Error(ErrorCode::InvalidParams, "unknown generator '" + options.kind + "'");
  data.id = options.id.empty() ? options.kind : options.id;
  require_valid_id(data.id);
  const auto path = storage.dataset(data.id);
  save_dataset(path, data);
  return {{"dataset_id", data.id}, {"path", path.string()}, {"num_graphs", data.graphs.size()}};
}

json train_and_save(const StorageLayout& storage, const std::string& dataset_id, const TrainOptions& options) {
  const DatasetBundle data = load_stored(storage, dataset_id);
  TrainConfig teacher_cfg;
  teacher_cfg.learning_rate = options.learning_rate;
  teacher_cfg.seed = options.seed;
  teacher_cfg.epochs = options.epochs.value_or(data.task == Task::NodeClassification ? 200 : 2000);
  const auto teacher = train_gcn(data, teacher_cfg);

  TrainConfig joint_cfg = teacher_cfg;
  joint_cfg.epochs = options.joint_epochs;
  const auto student = train_self_explainable(teacher.model, data, joint_cfg, options.sparsity_weight);

  write_json_file(storage.model(dataset_id, "gcn"),
                  to_checkpoint(teacher.model, {options.seed, teacher_cfg.epochs, dataset_id}));
  write_json_file(storage.model(dataset_id, "self_explainable"),
                  to_checkpoint(student.model, {options.seed, joint_cfg.epochs, dataset_id}));
  return {{"dataset_id", dataset_id},
          {"teacher_accuracy", accuracy_report(teacher.model, data)},
          {"student_accuracy", accuracy_report(student.model, data)},
          {"final_loss", student.history.empty() ? 0.0 : student.history.back().total}};
}

json distill_and_save(const StorageLayout& storage, const std::string& dataset_id,
                      const DistillRunOptions& options) {
  const DatasetBundle data = load_stored(storage, dataset_id);
  const GcnModel teacher = gcn_from_checkpoint(read_json_file(storage.model(dataset_id, "gcn")));
  TrainConfig cfg;
  cfg.epochs = options.epochs;
  cfg.learning_rate = options.learning_rate;
  cfg.seed = options.seed;
  const auto bundle = distill_mlp(teacher, data, cfg, {options.temperature});
  write_json_file(storage.model(dataset_id, "surrogate"), to_checkpoint(bundle, {options.seed, cfg.epochs, dataset_id}));
  return {{"dataset_id", dataset_id}, {"fidelity", bundle.fidelity}};
}

}  // namespace ingrex
