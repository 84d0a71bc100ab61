#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ingrex/sparse.hpp"

namespace ingrex {

enum class Activation { Relu, Sigmoid, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

template <typename Derived>
auto apply_activation(const Eigen::MatrixBase<Derived>& z, Activation a) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  switch (a) {
    case Activation::Relu: return Plain(z.cwiseMax(Scalar(0)));
    case Activation::Sigmoid:
      return Plain(z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); }));
    case Activation::Identity: break;
  }
  return Plain(z);
}

/// d(activation)/dz evaluated from the pre-activation z and output y.
template <typename Derived>
auto activation_derivative(const Eigen::MatrixBase<Derived>& z, const Eigen::MatrixBase<Derived>& y,
                           Activation a) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  switch (a) {
    case Activation::Relu:
      return Plain(z.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));
    case Activation::Sigmoid: return Plain(y.cwiseProduct((Scalar(1) - y.array()).matrix()));
    case Activation::Identity: break;
  }
  return Plain(Plain::Ones(z.rows(), z.cols()));
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// Max-subtracted softmax.
template <typename Scalar>
Vector<Scalar> softmax(const Eigen::Ref<const Vector<Scalar>>& z) {
  const Scalar shift = z.size() ? z.maxCoeff() : Scalar(0);
  Vector<Scalar> e = (z.array() - shift).exp().matrix();
  return e / e.sum();
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) { return softmax<double>(z); }

/// Row-wise softmax of a logit matrix, with an optional temperature.
template <typename Scalar>
Matrix<Scalar> softmax_rows(const Eigen::Ref<const Matrix<Scalar>>& z, Scalar temperature = Scalar(1)) {
  Matrix<Scalar> out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    out.row(r) = softmax<Scalar>((z.row(r) / temperature).transpose()).transpose();
  return out;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln p[label].
double cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int label);

/// sum p_t ln(p_t / p_s), with p_s floored at 1e-12 and 0 ln 0 = 0.
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p_teacher,
                     const Eigen::Ref<const Eigen::VectorXd>& p_student);

/// y = activation(x W + b), applied row-wise to a batch.
struct DenseLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::RowVectorXd bias;
  Activation activation = Activation::Identity;
};

struct MlpParams {
  std::vector<DenseLayer> layers;

  int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.rows()); }
  int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.cols()); }
  /// Same shapes, all zeros.
  MlpParams zeros_like() const;
  void validate() const;
};

/// Glorot-uniform weights, zero biases. `dims` includes the input dimension.
MlpParams init_mlp(std::span<const int> dims, std::span<const Activation> activations,
                   std::mt19937_64& rng);

/// Uniform(-s, s) with s = sqrt(6 / (fan_in + fan_out)).
Eigen::MatrixXd glorot_uniform(int fan_in, int fan_out, std::mt19937_64& rng);

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Intermediate values of a batched forward pass, kept for backprop.
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
};

MlpTape mlp_forward_batch(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Accumulates parameter gradients into `grads` and returns d loss / d input.
Eigen::MatrixXd mlp_backward(const MlpParams& params, const MlpTape& tape,
                             const Eigen::Ref<const Eigen::MatrixXd>& d_output, MlpParams& grads);

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

using ParamView = Eigen::Map<Eigen::VectorXd>;

template <typename Derived>
ParamView view_of(Eigen::PlainObjectBase<Derived>& m) {
  return ParamView(m.data(), m.size());
}

void append_views(MlpParams& params, std::vector<ParamView>& out);

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  double weight_decay = 0.0;

  /// learning_rate may be zero (a no-op run); it must not be negative.
  void validate() const;
};

struct OptimizerState {
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// One SGD or Adam update. Weight decay adds `weight_decay * p` to the
/// gradient before the update.
void grad_step(std::span<ParamView> params, std::span<const ParamView> grads,
               const TrainConfig& config, OptimizerState& state);

}  // namespace ingrex
