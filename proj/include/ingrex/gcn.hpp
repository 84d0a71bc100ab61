#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ingrex/graph.hpp"
#include "ingrex/nn.hpp"

namespace ingrex {

/// H' = activation((A ⊙ M) H W + b)
struct GcnLayer {
  Eigen::MatrixXd weight;
  Eigen::RowVectorXd bias;
  Activation activation = Activation::Relu;
};

/// Node-level models end in an identity GCN layer whose output is the logit
/// matrix. Graph-level models keep every GCN layer relu, mean-pool the last
/// one and classify the pooled vector with `readout`.
struct GcnModel {
  Task task = Task::NodeClassification;
  std::vector<GcnLayer> layers;
  std::optional<DenseLayer> readout;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.rows()); }
  int num_classes() const;
  /// Index into GcnForward::hidden of the representation that feeds the
  /// classification head (last hidden layer).
  int embedding_layer() const;
  int embedding_dim() const;
  GcnModel zeros_like() const;
  void validate() const;
};

GcnModel init_gcn(Task task, int input_dim, std::span<const int> hidden_dims, int num_classes,
                  std::mt19937_64& rng);

struct GcnForward {
  std::vector<Eigen::MatrixXd> hidden;  // H^0 (features) .. H^L
  std::vector<Eigen::MatrixXd> pre;     // pre-activations per layer
  Eigen::RowVectorXd pooled;            // graph models only
  Eigen::MatrixXd logits;               // n x C for node models, 1 x C for graph models

  const Eigen::MatrixXd& embeddings(const GcnModel& m) const { return hidden[m.embedding_layer()]; }
};

/// `mask` (one value per stored entry of `adj`) scales the adjacency in every
/// layer; empty means unmasked.
GcnForward gcn_forward(const GcnModel& model, const NormalizedAdjacency& adj,
                       const Eigen::Ref<const Eigen::MatrixXd>& features,
                       std::span<const double> mask = {});

/// Accumulates parameter gradients into `grads`. When `d_mask` is non-null it
/// receives d loss / d mask per stored entry (accumulated).
void gcn_backward(const GcnModel& model, const NormalizedAdjacency& adj,
                  std::span<const double> mask, const GcnForward& fwd,
                  const Eigen::Ref<const Eigen::MatrixXd>& d_logits, GcnModel& grads,
                  std::vector<double>* d_mask = nullptr);

void append_views(GcnModel& model, std::vector<ParamView>& out);

// ---------------------------------------------------------------------------
// Edge masks and the self-explainable model
// ---------------------------------------------------------------------------

struct EdgeMask {
  std::vector<double> values;  // aligned with the adjacency's CSR entries
};

struct EdgeMaskTape {
  MlpTape mlp;
  EdgeMask mask;
};

/// m_ij = sigmoid(MLP([h_i, h_j])) for every stored entry (i, j).
EdgeMask compute_edge_mask(const MlpParams& mask_mlp, const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                           const CsrMatrix<double>& adjacency);
EdgeMaskTape compute_edge_mask_taped(const MlpParams& mask_mlp,
                                     const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                                     const CsrMatrix<double>& adjacency);

/// Student GCN with a learned edge mask. The mask MLP reads node embeddings
/// from `embedder`, a frozen copy of the teacher.
struct SelfExplainableGcn {
  GcnModel embedder;
  GcnModel base;
  MlpParams mask_mlp;

  void validate() const;
};

/// Mask for one graph: teacher embeddings -> mask MLP over `adj` entries.
EdgeMask model_edge_mask(const SelfExplainableGcn& model, const NormalizedAdjacency& adj,
                         const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Logits of the student under `mask`.
Eigen::MatrixXd masked_gcn_forward(const SelfExplainableGcn& model, const NormalizedAdjacency& adj,
                                   const Eigen::Ref<const Eigen::MatrixXd>& features,
                                   const EdgeMask& mask);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Dataset with the symmetric-normalized adjacency of every graph cached.
struct PreparedDataset {
  const DatasetBundle* data = nullptr;
  std::vector<NormalizedAdjacency> adjacency;

  explicit PreparedDataset(const DatasetBundle& d);
  /// Items are node ids (node tasks) or graph ids (graph tasks).
  int label(int item) const;
};

/// Class probabilities for every item of the dataset (nodes or graphs).
Eigen::MatrixXd predict_probabilities(const GcnModel& model, const PreparedDataset& data);
Eigen::MatrixXd predict_logits(const GcnModel& model, const PreparedDataset& data);

double accuracy(const GcnModel& model, const PreparedDataset& data, std::span<const int> items);

/// Mean cross-entropy over `items`; accumulates gradients when `grads` is set.
double supervised_loss(const GcnModel& model, const PreparedDataset& data, std::span<const int> items,
                       GcnModel* grads);

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> train_accuracy;
  std::vector<double> val_accuracy;
};

struct TrainedGcn {
  GcnModel model;
  TrainHistory history;
};

/// Empty hidden_dims selects the task default: one hidden layer of 16 for
/// node tasks (two GCN layers), three relu layers of 16 for graph tasks.
struct GcnArchitecture {
  std::vector<int> hidden_dims;

  std::vector<int> resolved(Task task) const;
};

/// Full-batch training of the teacher on the train split.
TrainedGcn train_gcn(const DatasetBundle& dataset, const TrainConfig& config,
                     const GcnArchitecture& arch = {});

/// Fixed inputs of the joint objective: teacher embeddings per graph and
/// teacher probabilities per item.
struct JointTargets {
  std::vector<Eigen::MatrixXd> embeddings;
  Eigen::MatrixXd teacher_probs;  // rows indexed by item
};

JointTargets make_joint_targets(const GcnModel& teacher, const PreparedDataset& data);

struct JointLossTerms {
  double kl = 0.0;
  double cross_entropy = 0.0;
  double sparsity = 0.0;  // mean mask value, before weighting
  double total = 0.0;
};

/// KL(teacher || masked student) + CE + sparsity_weight * mean(m), averaged
/// over `items`. Gradients (student weights and mask MLP) accumulate into
/// `grads` when set.
JointLossTerms joint_loss(const SelfExplainableGcn& model, const PreparedDataset& data,
                          const JointTargets& targets, std::span<const int> items,
                          double sparsity_weight, SelfExplainableGcn* grads);

void append_views(SelfExplainableGcn& model, std::vector<ParamView>& out);

/// Student logits under its own learned mask, one row per item.
Eigen::MatrixXd predict_logits(const SelfExplainableGcn& model, const PreparedDataset& data);
double accuracy(const SelfExplainableGcn& model, const PreparedDataset& data, std::span<const int> items);

struct TrainedSelfExplainable {
  SelfExplainableGcn model;
  std::vector<JointLossTerms> history;
};

struct MaskArchitecture {
  int hidden_dim = 16;
};

/// Student starts as a copy of the teacher; student weights and the mask MLP
/// are optimized together on the train split.
TrainedSelfExplainable train_self_explainable(const GcnModel& teacher, const DatasetBundle& dataset,
                                              const TrainConfig& config, double sparsity_weight,
                                              const MaskArchitecture& arch = {});

}  // namespace ingrex
