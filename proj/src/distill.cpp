#include "ingrex/distill.hpp"

#include <numeric>

namespace ingrex {

namespace {

std::vector<int> argmax_rows(const Eigen::MatrixXd& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::Index arg = 0;
    m.row(r).maxCoeff(&arg);
    out[static_cast<std::size_t>(r)] = static_cast<int>(arg);
  }
  return out;
}

double agreement(const std::vector<int>& a, const std::vector<int>& b, std::span<const int> nodes) {
  int hits = 0;
  for (int i : nodes) hits += a[i] == b[i];
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

void check_node_task(const GcnModel& teacher, const DatasetBundle& dataset) {
  if (dataset.task != Task::NodeClassification)
    throw Error(ErrorCode::InvalidConfig, "distillation needs a node classification dataset");
  if (teacher.task != Task::NodeClassification || teacher.input_dim() != dataset.feature_dim())
    throw Error(ErrorCode::IncompatibleModel, "teacher does not match dataset '" + dataset.id + "'");
}

}  // namespace

int surrogate_class(const MlpParams& student, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::Index arg = 0;
  mlp_forward(student, x).maxCoeff(&arg);
  return static_cast<int>(arg);
}

double distillation_loss(const MlpParams& student, const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const Eigen::Ref<const Eigen::MatrixXd>& teacher_probs, std::span<const int> nodes,
                         double temperature, MlpParams* grads) {
  const auto tape = mlp_forward_batch(student, features);
  const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(nodes.size(), 1));
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(tape.output.rows(), tape.output.cols());
  double loss = 0.0;
  for (int i : nodes) {
    const Eigen::VectorXd p = softmax<double>(tape.output.row(i).transpose() / temperature);
    loss += scale * kl_divergence(teacher_probs.row(i).transpose(), p);
    d_out.row(i) = scale * (p.transpose() - teacher_probs.row(i)) / temperature;
  }
  if (grads) mlp_backward(student, tape, d_out, *grads);
  return loss;
}

SurrogateBundle distill_mlp(const GcnModel& teacher, const DatasetBundle& dataset, const TrainConfig& config,
                            const DistillOptions& options) {
  config.validate();
  if (!(options.temperature > 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be > 0");
  if (options.hidden_dim < 1) throw Error(ErrorCode::InvalidConfig, "hidden_dim must be >= 1");
  validate(dataset);
  check_node_task(teacher, dataset);
  if (dataset.split.train.empty()) throw Error(ErrorCode::InvalidConfig, "distill: empty train split");

  const PreparedDataset data(dataset);
  const Eigen::MatrixXd& x = dataset.graphs.front().features;
  const Eigen::MatrixXd teacher_logits = predict_logits(teacher, data);
  const Eigen::MatrixXd soft_targets = softmax_rows<double>(teacher_logits, options.temperature);

  std::mt19937_64 rng(config.seed);
  const int dims[] = {dataset.feature_dim(), options.hidden_dim, teacher.num_classes()};
  const Activation acts[] = {Activation::Relu, Activation::Identity};
  SurrogateBundle out;
  out.student = init_mlp(dims, acts, rng);
  out.dataset_id = dataset.id;
  out.temperature = options.temperature;

  OptimizerState state;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    MlpParams grads = out.student.zeros_like();
    distillation_loss(out.student, x, soft_targets, dataset.split.train, options.temperature, &grads);
    std::vector<ParamView> p, g;
    append_views(out.student, p);
    append_views(grads, g);
    grad_step(p, g, config, state);
  }

  std::vector<int> held_out = dataset.split.test;
  if (held_out.empty()) {
    held_out.resize(static_cast<std::size_t>(x.rows()));
    std::iota(held_out.begin(), held_out.end(), 0);
  }
  out.fidelity = agreement(argmax_rows(teacher_logits), argmax_rows(mlp_forward_batch(out.student, x).output),
                           held_out);
  return out;
}

FidelityReport fidelity_report(const SurrogateBundle& bundle, const GcnModel& teacher,
                               const DatasetBundle& dataset) {
  if (bundle.dataset_id != dataset.id || bundle.student.input_dim() != dataset.feature_dim() ||
      dataset.task != Task::NodeClassification)
    throw Error(ErrorCode::DatasetMismatch, "surrogate was distilled on '" + bundle.dataset_id + "', not '" +
                                                dataset.id + "'");
  check_node_task(teacher, dataset);
  const PreparedDataset data(dataset);
  const auto& x = dataset.graphs.front().features;
  const auto t = argmax_rows(predict_logits(teacher, data));
  const auto s = argmax_rows(mlp_forward_batch(bundle.student, x).output);
  FidelityReport r;
  if (!dataset.split.train.empty()) r.train = agreement(t, s, dataset.split.train);
  if (!dataset.split.val.empty()) r.val = agreement(t, s, dataset.split.val);
  if (!dataset.split.test.empty()) r.test = agreement(t, s, dataset.split.test);
  std::vector<int> all(t.size());
  std::iota(all.begin(), all.end(), 0);
  r.all = all.empty() ? 0.0 : agreement(t, s, all);
  return r;
}

}  // namespace ingrex
