#include "ingrex/shapley.hpp"

#include <algorithm>
#include <numeric>

namespace ingrex {

std::string to_string(ShapMethod m) { return m == ShapMethod::Exact ? "exact" : "kernel"; }

double surrogate_probability(const MlpParams& student, const Eigen::VectorXd& z, int cls) {
  return softmax(mlp_forward(student, z))[cls];
}

namespace {

int resolve_class(const MlpParams& student, const Eigen::VectorXd& x, int explained_class) {
  if (explained_class < 0) return surrogate_class(student, x);
  if (explained_class >= student.output_dim())
    throw Error(ErrorCode::TargetOutOfRange, "explained class " + std::to_string(explained_class) + " out of range");
  return explained_class;
}

void check_node(const DatasetBundle& dataset, int node_id) {
  if (dataset.task != Task::NodeClassification)
    throw Error(ErrorCode::IncompatibleModel, "feature attribution needs a node classification dataset");
  if (node_id < 0 || node_id >= dataset.graphs.front().node_count)
    throw Error(ErrorCode::TargetOutOfRange, "node " + std::to_string(node_id) + " is not in the graph");
}

void check_surrogate(const SurrogateBundle& surrogate, const DatasetBundle& dataset) {
  if (surrogate.dataset_id != dataset.id || surrogate.student.input_dim() != dataset.feature_dim())
    throw Error(ErrorCode::DatasetMismatch, "surrogate was distilled on '" + surrogate.dataset_id + "'");
}

}  // namespace

FeatureAttribution attribute_exact(const MlpParams& student, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& background, int explained_class) {
  const int cls = resolve_class(student, x, explained_class);
  auto out = exact_shapley([&](const Eigen::VectorXd& z) { return surrogate_probability(student, z, cls); }, x,
                           background);
  out.explained_class = cls;
  return out;
}

FeatureAttribution attribute_kernel(const MlpParams& student, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& background, int n_samples, std::uint64_t seed,
                                    int explained_class) {
  const int cls = resolve_class(student, x, explained_class);
  auto out = kernel_shap([&](const Eigen::VectorXd& z) { return surrogate_probability(student, z, cls); }, x,
                         background, n_samples, seed);
  out.explained_class = cls;
  return out;
}

Eigen::VectorXd training_background(const DatasetBundle& dataset) {
  const auto& x = dataset.graphs.front().features;
  if (dataset.split.train.empty()) return x.colwise().mean().transpose();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.cols());
  for (int i : dataset.split.train) sum += x.row(i).transpose();
  return sum / static_cast<double>(dataset.split.train.size());
}

FeatureAttribution attribute_node(const SurrogateBundle& surrogate, const DatasetBundle& dataset, int node_id,
                                  int n_samples, std::uint64_t seed) {
  check_node(dataset, node_id);
  check_surrogate(surrogate, dataset);
  auto out = attribute_kernel(surrogate.student, dataset.graphs.front().features.row(node_id).transpose(),
                              training_background(dataset), n_samples, seed);
  out.node_id = node_id;
  return out;
}

std::vector<int> rank_features(const Eigen::VectorXd& values) {
  std::vector<int> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

AttributionSummary summarize_attributions(const SurrogateBundle& surrogate, const DatasetBundle& dataset,
                                          std::span<const int> sample_ids, int n_samples, std::uint64_t seed) {
  if (sample_ids.empty()) throw Error(ErrorCode::EmptySample, "summary needs at least one sample id");
  for (int id : sample_ids) check_node(dataset, id);
  check_surrogate(surrogate, dataset);
  const Eigen::VectorXd background = training_background(dataset);
  const auto& x = dataset.graphs.front().features;

  AttributionSummary out;
  out.mean_abs_phi = Eigen::VectorXd::Zero(x.cols());
  for (int id : sample_ids)
    out.mean_abs_phi +=
        attribute_kernel(surrogate.student, x.row(id).transpose(), background, n_samples, seed).phi.cwiseAbs();
  out.mean_abs_phi /= static_cast<double>(sample_ids.size());
  out.feature_ranking = rank_features(out.mean_abs_phi);
  out.sample_ids.assign(sample_ids.begin(), sample_ids.end());
  return out;
}

}  // namespace ingrex
