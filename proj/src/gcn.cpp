#include "ingrex/gcn.hpp"

#include <numeric>

namespace ingrex {

int GcnModel::num_classes() const {
  if (readout) return static_cast<int>(readout->weight.cols());
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.cols());
}

int GcnModel::embedding_layer() const {
  const int depth = static_cast<int>(layers.size());
  return task == Task::GraphClassification ? depth : depth - 1;
}

int GcnModel::embedding_dim() const {
  const int k = embedding_layer();
  return k == 0 ? input_dim() : static_cast<int>(layers[k - 1].weight.cols());
}

GcnModel GcnModel::zeros_like() const {
  GcnModel z = *this;
  for (auto& l : z.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  if (z.readout) {
    z.readout->weight.setZero();
    z.readout->bias.setZero();
  }
  return z;
}

void GcnModel::validate() const {
  if (layers.empty()) throw Error(ErrorCode::InvalidConfig, "gcn: at least one layer required");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].bias.size() != layers[i].weight.cols())
      throw Error(ErrorCode::DimensionMismatch, "gcn: bias length differs from layer width");
    if (i > 0 && layers[i].weight.rows() != layers[i - 1].weight.cols())
      throw Error(ErrorCode::DimensionMismatch, "gcn: layer dimensions do not chain");
  }
  if (task == Task::GraphClassification) {
    if (!readout) throw Error(ErrorCode::InvalidConfig, "gcn: graph model without readout");
    if (readout->weight.rows() != layers.back().weight.cols() ||
        readout->bias.size() != readout->weight.cols())
      throw Error(ErrorCode::DimensionMismatch, "gcn: readout does not match last layer");
  } else if (readout) {
    throw Error(ErrorCode::InvalidConfig, "gcn: node model with readout");
  }
}

GcnModel init_gcn(Task task, int input_dim, std::span<const int> hidden_dims, int num_classes,
                  std::mt19937_64& rng) {
  GcnModel m;
  m.task = task;
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  if (task == Task::NodeClassification) dims.push_back(num_classes);
  if (dims.size() < 2) throw Error(ErrorCode::InvalidConfig, "gcn: graph model needs a hidden layer");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    const auto act = task == Task::NodeClassification && last ? Activation::Identity : Activation::Relu;
    m.layers.push_back({glorot_uniform(dims[i], dims[i + 1], rng), Eigen::RowVectorXd::Zero(dims[i + 1]), act});
  }
  if (task == Task::GraphClassification)
    m.readout = DenseLayer{glorot_uniform(dims.back(), num_classes, rng),
                           Eigen::RowVectorXd::Zero(num_classes), Activation::Identity};
  return m;
}

GcnForward gcn_forward(const GcnModel& model, const NormalizedAdjacency& adj,
                       const Eigen::Ref<const Eigen::MatrixXd>& features, std::span<const double> mask) {
  if (features.cols() != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "gcn_forward: feature dim " + std::to_string(features.cols()) +
                                                  " != model input dim " + std::to_string(model.input_dim()));
  if (features.rows() != adj.matrix.n_rows)
    throw Error(ErrorCode::DimensionMismatch, "gcn_forward: feature rows differ from node count");
  if (!mask.empty() && static_cast<int>(mask.size()) != adj.matrix.nnz())
    throw Error(ErrorCode::MisalignedMask, "gcn_forward: mask length " + std::to_string(mask.size()) +
                                               " != adjacency nnz " + std::to_string(adj.matrix.nnz()));
  GcnForward f;
  f.hidden.push_back(features);
  for (const auto& layer : model.layers) {
    Eigen::MatrixXd z = spmm(adj.matrix, f.hidden.back(), mask) * layer.weight;
    z.rowwise() += layer.bias;
    f.hidden.push_back(apply_activation(z, layer.activation));
    f.pre.push_back(std::move(z));
  }
  if (model.readout) {
    const auto& h = f.hidden.back();
    f.pooled = h.rows() ? Eigen::RowVectorXd(h.colwise().mean()) : Eigen::RowVectorXd::Zero(h.cols());
    f.logits = f.pooled * model.readout->weight + model.readout->bias;
  } else {
    f.logits = f.hidden.back();
  }
  return f;
}

void gcn_backward(const GcnModel& model, const NormalizedAdjacency& adj, std::span<const double> mask,
                  const GcnForward& fwd, const Eigen::Ref<const Eigen::MatrixXd>& d_logits, GcnModel& grads,
                  std::vector<double>* d_mask) {
  const auto& a = adj.matrix;
  Eigen::MatrixXd d_h;
  if (model.readout) {
    grads.readout->weight.noalias() += fwd.pooled.transpose() * d_logits;
    grads.readout->bias += d_logits.colwise().sum();
    const Eigen::RowVectorXd d_pooled = d_logits.colwise().sum() * model.readout->weight.transpose();
    const auto n = fwd.hidden.back().rows();
    d_h = Eigen::MatrixXd::Ones(n, 1) * (d_pooled / static_cast<double>(std::max<Eigen::Index>(n, 1)));
  } else {
    d_h = d_logits;
  }
  if (d_mask && d_mask->size() != static_cast<std::size_t>(a.nnz())) d_mask->assign(a.nnz(), 0.0);

  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const auto& layer = model.layers[k];
    const Eigen::MatrixXd& h_in = fwd.hidden[k];
    const Eigen::MatrixXd dz =
        d_h.cwiseProduct(activation_derivative(fwd.pre[k], fwd.hidden[k + 1], layer.activation));
    const Eigen::MatrixXd ah = spmm(a, h_in, mask);
    grads.layers[k].weight.noalias() += ah.transpose() * dz;
    grads.layers[k].bias += dz.colwise().sum();
    const Eigen::MatrixXd d_ah = dz * layer.weight.transpose();
    if (d_mask)
      a.for_each([&](int p, int r, int c, double v) { (*d_mask)[p] += v * d_ah.row(r).dot(h_in.row(c)); });
    if (k > 0) d_h = spmm_transposed(a, d_ah, mask);
  }
}

void append_views(GcnModel& model, std::vector<ParamView>& out) {
  for (auto& l : model.layers) {
    out.push_back(view_of(l.weight));
    out.push_back(view_of(l.bias));
  }
  if (model.readout) {
    out.push_back(view_of(model.readout->weight));
    out.push_back(view_of(model.readout->bias));
  }
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd edge_inputs(const Eigen::Ref<const Eigen::MatrixXd>& h, const CsrMatrix<double>& a) {
  const auto d = h.cols();
  Eigen::MatrixXd x(a.nnz(), 2 * d);
  a.for_each([&](int p, int r, int c, double) {
    x.row(p).head(d) = h.row(r);
    x.row(p).tail(d) = h.row(c);
  });
  return x;
}

}  // namespace

EdgeMaskTape compute_edge_mask_taped(const MlpParams& mask_mlp, const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                     const CsrMatrix<double>& adjacency) {
  if (embeddings.rows() != adjacency.n_rows)
    throw Error(ErrorCode::DimensionMismatch, "compute_edge_mask: embedding rows != node count");
  if (mask_mlp.input_dim() != 2 * embeddings.cols() || mask_mlp.output_dim() != 1)
    throw Error(ErrorCode::DimensionMismatch, "compute_edge_mask: mask MLP expects input dim " +
                                                  std::to_string(mask_mlp.input_dim()));
  EdgeMaskTape t;
  t.mlp = mlp_forward_batch(mask_mlp, edge_inputs(embeddings, adjacency));
  t.mask.values.resize(adjacency.nnz());
  for (int p = 0; p < adjacency.nnz(); ++p) t.mask.values[p] = sigmoid(t.mlp.output(p, 0));
  return t;
}

EdgeMask compute_edge_mask(const MlpParams& mask_mlp, const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                           const CsrMatrix<double>& adjacency) {
  return compute_edge_mask_taped(mask_mlp, embeddings, adjacency).mask;
}

void SelfExplainableGcn::validate() const {
  embedder.validate();
  base.validate();
  mask_mlp.validate();
  if (embedder.input_dim() != base.input_dim() || embedder.num_classes() != base.num_classes())
    throw Error(ErrorCode::DimensionMismatch, "self-explainable: teacher and student shapes differ");
  if (mask_mlp.input_dim() != 2 * embedder.embedding_dim() || mask_mlp.output_dim() != 1)
    throw Error(ErrorCode::DimensionMismatch, "self-explainable: mask MLP input must be 2x embedding dim");
}

EdgeMask model_edge_mask(const SelfExplainableGcn& model, const NormalizedAdjacency& adj,
                         const Eigen::Ref<const Eigen::MatrixXd>& features) {
  const auto fwd = gcn_forward(model.embedder, adj, features);
  return compute_edge_mask(model.mask_mlp, fwd.embeddings(model.embedder), adj.matrix);
}

Eigen::MatrixXd masked_gcn_forward(const SelfExplainableGcn& model, const NormalizedAdjacency& adj,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features, const EdgeMask& mask) {
  if (static_cast<int>(mask.values.size()) != adj.matrix.nnz())
    throw Error(ErrorCode::MisalignedMask, "masked_gcn_forward: mask not aligned with adjacency");
  return gcn_forward(model.base, adj, features, mask.values).logits;
}

// ---------------------------------------------------------------------------

PreparedDataset::PreparedDataset(const DatasetBundle& d) : data(&d) {
  adjacency.reserve(d.graphs.size());
  for (const auto& g : d.graphs) adjacency.push_back(sym_normalized_adjacency(g));
}

int PreparedDataset::label(int item) const {
  if (data->task == Task::NodeClassification) return (*data->graphs.front().node_labels)[item];
  return *data->graphs[item].graph_label;
}

namespace {

template <typename GraphLogits>
Eigen::MatrixXd logits_per_item(const PreparedDataset& data, int classes, GraphLogits&& logits_of) {
  const auto& d = *data.data;
  if (d.task == Task::NodeClassification) return logits_of(data.adjacency.front(), d.graphs.front().features);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.graphs.size()), classes);
  for (std::size_t g = 0; g < d.graphs.size(); ++g)
    out.row(static_cast<Eigen::Index>(g)) = logits_of(data.adjacency[g], d.graphs[g].features);
  return out;
}

double hit_rate(const Eigen::MatrixXd& logits, const PreparedDataset& data, std::span<const int> items) {
  if (items.empty()) return 0.0;
  int hits = 0;
  for (int i : items) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    hits += static_cast<int>(arg) == data.label(i);
  }
  return static_cast<double>(hits) / static_cast<double>(items.size());
}

}  // namespace

Eigen::MatrixXd predict_logits(const GcnModel& model, const PreparedDataset& data) {
  return logits_per_item(data, model.num_classes(), [&](const NormalizedAdjacency& adj, const Eigen::MatrixXd& x) {
    return gcn_forward(model, adj, x).logits;
  });
}

Eigen::MatrixXd predict_logits(const SelfExplainableGcn& model, const PreparedDataset& data) {
  return logits_per_item(data, model.base.num_classes(),
                         [&](const NormalizedAdjacency& adj, const Eigen::MatrixXd& x) {
                           return masked_gcn_forward(model, adj, x, model_edge_mask(model, adj, x));
                         });
}

Eigen::MatrixXd predict_probabilities(const GcnModel& model, const PreparedDataset& data) {
  return softmax_rows<double>(predict_logits(model, data));
}

double accuracy(const GcnModel& model, const PreparedDataset& data, std::span<const int> items) {
  return hit_rate(predict_logits(model, data), data, items);
}

double accuracy(const SelfExplainableGcn& model, const PreparedDataset& data, std::span<const int> items) {
  return hit_rate(predict_logits(model, data), data, items);
}

double supervised_loss(const GcnModel& model, const PreparedDataset& data, std::span<const int> items,
                       GcnModel* grads) {
  const auto& d = *data.data;
  const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(items.size(), 1));
  double loss = 0.0;
  if (d.task == Task::NodeClassification) {
    const auto& adj = data.adjacency.front();
    const auto fwd = gcn_forward(model, adj, d.graphs.front().features);
    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(fwd.logits.rows(), fwd.logits.cols());
    for (int i : items) {
      const Eigen::VectorXd p = softmax<double>(fwd.logits.row(i).transpose());
      loss += cross_entropy(p, data.label(i)) * scale;
      Eigen::VectorXd g = p;
      g[data.label(i)] -= 1.0;
      d_logits.row(i) += scale * g.transpose();
    }
    if (grads) gcn_backward(model, adj, {}, fwd, d_logits, *grads);
    return loss;
  }
  for (int gi : items) {
    const auto& adj = data.adjacency[gi];
    const auto fwd = gcn_forward(model, adj, d.graphs[gi].features);
    const Eigen::VectorXd p = softmax<double>(fwd.logits.row(0).transpose());
    loss += cross_entropy(p, data.label(gi)) * scale;
    if (grads) {
      Eigen::VectorXd g = p;
      g[data.label(gi)] -= 1.0;
      gcn_backward(model, adj, {}, fwd, scale * g.transpose(), *grads);
    }
  }
  return loss;
}

std::vector<int> GcnArchitecture::resolved(Task task) const {
  if (!hidden_dims.empty()) return hidden_dims;
  return task == Task::NodeClassification ? std::vector<int>{16} : std::vector<int>{16, 16, 16};
}

// Accuracy history is sampled, not recorded every epoch.
constexpr int kAccuracyEvery = 10;

TrainedGcn train_gcn(const DatasetBundle& dataset, const TrainConfig& config, const GcnArchitecture& arch) {
  config.validate();
  validate(dataset);
  if (dataset.split.train.empty()) throw Error(ErrorCode::InvalidConfig, "train_gcn: empty train split");
  std::mt19937_64 rng(config.seed);
  TrainedGcn out{init_gcn(dataset.task, dataset.feature_dim(), arch.resolved(dataset.task), dataset.num_classes, rng), {}};
  const PreparedDataset data(dataset);
  OptimizerState state;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    GcnModel grads = out.model.zeros_like();
    out.history.loss.push_back(supervised_loss(out.model, data, dataset.split.train, &grads));
    std::vector<ParamView> p, g;
    append_views(out.model, p);
    append_views(grads, g);
    grad_step(p, g, config, state);
    if ((epoch + 1) % kAccuracyEvery == 0 || epoch + 1 == config.epochs) {
      out.history.train_accuracy.push_back(accuracy(out.model, data, dataset.split.train));
      out.history.val_accuracy.push_back(accuracy(out.model, data, dataset.split.val));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

JointTargets make_joint_targets(const GcnModel& teacher, const PreparedDataset& data) {
  const auto& d = *data.data;
  JointTargets t;
  for (std::size_t g = 0; g < d.graphs.size(); ++g)
    t.embeddings.push_back(gcn_forward(teacher, data.adjacency[g], d.graphs[g].features).embeddings(teacher));
  t.teacher_probs = predict_probabilities(teacher, data);
  return t;
}

namespace {

// Loss contribution of one forward pass; returns d loss / d logits rows.
struct ItemTerms {
  double kl;
  double ce;
  Eigen::RowVectorXd d_logits;
};

ItemTerms item_terms(const Eigen::RowVectorXd& logits, const Eigen::RowVectorXd& teacher, int label) {
  const Eigen::VectorXd p = softmax<double>(logits.transpose());
  Eigen::RowVectorXd d = 2.0 * p.transpose() - teacher;
  d[label] -= 1.0;
  return {kl_divergence(teacher.transpose(), p), cross_entropy(p, label), d};
}

}  // namespace

JointLossTerms joint_loss(const SelfExplainableGcn& model, const PreparedDataset& data, const JointTargets& targets,
                          std::span<const int> items, double sparsity_weight, SelfExplainableGcn* grads) {
  const auto& d = *data.data;
  const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(items.size(), 1));
  JointLossTerms terms;

  // Graphs whose masks enter the objective.
  std::vector<int> graphs;
  if (d.task == Task::NodeClassification)
    graphs.push_back(0);
  else
    graphs.assign(items.begin(), items.end());

  std::size_t mask_entries = 0;
  for (int g : graphs) mask_entries += static_cast<std::size_t>(data.adjacency[g].matrix.nnz());
  const double mask_scale = 1.0 / static_cast<double>(std::max<std::size_t>(mask_entries, 1));

  for (int g : graphs) {
    const auto& adj = data.adjacency[g];
    const auto tape = compute_edge_mask_taped(model.mask_mlp, targets.embeddings[g], adj.matrix);
    const auto& m = tape.mask.values;
    const auto fwd = gcn_forward(model.base, adj, d.graphs[g].features, m);

    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(fwd.logits.rows(), fwd.logits.cols());
    const auto accumulate = [&](int item, Eigen::Index row) {
      const auto t = item_terms(fwd.logits.row(row), targets.teacher_probs.row(item), data.label(item));
      terms.kl += scale * t.kl;
      terms.cross_entropy += scale * t.ce;
      d_logits.row(row) += scale * t.d_logits;
    };
    if (d.task == Task::NodeClassification)
      for (int i : items) accumulate(i, i);
    else
      accumulate(g, 0);
    for (double v : m) terms.sparsity += v * mask_scale;

    if (!grads) continue;
    std::vector<double> d_mask;
    gcn_backward(model.base, adj, m, fwd, d_logits, grads->base, &d_mask);
    Eigen::MatrixXd d_pre(static_cast<Eigen::Index>(m.size()), 1);
    for (std::size_t p = 0; p < m.size(); ++p)
      d_pre(static_cast<Eigen::Index>(p), 0) =
          (d_mask[p] + sparsity_weight * mask_scale) * m[p] * (1.0 - m[p]);
    mlp_backward(model.mask_mlp, tape.mlp, d_pre, grads->mask_mlp);
  }
  terms.total = terms.kl + terms.cross_entropy + sparsity_weight * terms.sparsity;
  return terms;
}

void append_views(SelfExplainableGcn& model, std::vector<ParamView>& out) {
  append_views(model.base, out);
  append_views(model.mask_mlp, out);
}

TrainedSelfExplainable train_self_explainable(const GcnModel& teacher, const DatasetBundle& dataset,
                                              const TrainConfig& config, double sparsity_weight,
                                              const MaskArchitecture& arch) {
  config.validate();
  validate(dataset);
  teacher.validate();
  if (teacher.input_dim() != dataset.feature_dim())
    throw Error(ErrorCode::DimensionMismatch, "train_self_explainable: teacher expects feature dim " +
                                                  std::to_string(teacher.input_dim()));
  if (teacher.task != dataset.task || teacher.num_classes() != dataset.num_classes)
    throw Error(ErrorCode::DimensionMismatch, "train_self_explainable: teacher was trained for another task");
  if (sparsity_weight < 0.0) throw Error(ErrorCode::InvalidConfig, "sparsity_weight must be >= 0");

  std::mt19937_64 rng(config.seed);
  TrainedSelfExplainable out;
  out.model.embedder = teacher;
  out.model.base = teacher;
  const int e = teacher.embedding_dim();
  const int dims[] = {2 * e, arch.hidden_dim, 1};
  const Activation acts[] = {Activation::Relu, Activation::Identity};
  out.model.mask_mlp = init_mlp(dims, acts, rng);

  const PreparedDataset data(dataset);
  const JointTargets targets = make_joint_targets(teacher, data);
  OptimizerState state;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    SelfExplainableGcn grads{{}, out.model.base.zeros_like(), out.model.mask_mlp.zeros_like()};
    out.history.push_back(joint_loss(out.model, data, targets, dataset.split.train, sparsity_weight, &grads));
    std::vector<ParamView> p, g;
    append_views(out.model, p);
    append_views(grads, g);
    grad_step(p, g, config, state);
  }
  return out;
}

}  // namespace ingrex
