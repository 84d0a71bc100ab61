#pragma once

#include <optional>
#include <string>

#include "ingrex/gcn.hpp"

namespace ingrex {

/// Feature-only MLP trained to imitate a GCN teacher.
struct SurrogateBundle {
  MlpParams student;
  /// Argmax agreement with the teacher on held-out nodes, recorded at train time.
  double fidelity = 0.0;
  std::string dataset_id;
  double temperature = 2.0;
};

struct DistillOptions {
  double temperature = 2.0;
  int hidden_dim = 32;
};

/// Minimizes mean KL(softmax(teacher / T) || softmax(student / T)) over the
/// train split, reading node features only. Fidelity is measured on the test
/// split (or every node when the test split is empty).
SurrogateBundle distill_mlp(const GcnModel& teacher, const DatasetBundle& dataset, const TrainConfig& config,
                            const DistillOptions& options = {});

/// Mean temperature-scaled KL over `nodes`; accumulates gradients when set.
double distillation_loss(const MlpParams& student, const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const Eigen::Ref<const Eigen::MatrixXd>& teacher_probs, std::span<const int> nodes,
                         double temperature, MlpParams* grads);

/// Agreement rate between surrogate and teacher argmax per split. A split
/// with no nodes has no rate.
struct FidelityReport {
  std::optional<double> train;
  std::optional<double> val;
  std::optional<double> test;
  double all = 0.0;
};

FidelityReport fidelity_report(const SurrogateBundle& bundle, const GcnModel& teacher,
                               const DatasetBundle& dataset);

/// Argmax of the surrogate for one feature row.
int surrogate_class(const MlpParams& student, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace ingrex
