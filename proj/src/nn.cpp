#include "ingrex/nn.hpp"

#include <algorithm>

namespace ingrex {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "identity") return Activation::Identity;
  throw Error(ErrorCode::ParseError, "unknown activation '" + s + "'");
}

double cross_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int label) {
  if (label < 0 || label >= probs.size())
    throw Error(ErrorCode::DimensionMismatch, "cross_entropy: label outside probability vector");
  return -std::log(std::max(probs[label], kProbabilityFloor));
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p_teacher,
                     const Eigen::Ref<const Eigen::VectorXd>& p_student) {
  if (p_teacher.size() != p_student.size())
    throw Error(ErrorCode::DimensionMismatch, "kl_divergence: length mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p_teacher.size(); ++i) {
    if (p_teacher[i] <= 0.0) continue;
    kl += p_teacher[i] * std::log(p_teacher[i] / std::max(p_student[i], kProbabilityFloor));
  }
  return kl;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z = *this;
  for (auto& l : z.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return z;
}

void MlpParams::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].bias.size() != layers[i].weight.cols())
      throw Error(ErrorCode::DimensionMismatch, "mlp: bias length differs from layer width");
    if (i > 0 && layers[i].weight.rows() != layers[i - 1].weight.cols())
      throw Error(ErrorCode::DimensionMismatch, "mlp: layer dimensions do not chain");
  }
}

Eigen::MatrixXd glorot_uniform(int fan_in, int fan_out, std::mt19937_64& rng) {
  const double s = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-s, s);
  Eigen::MatrixXd w(fan_in, fan_out);
  // Fill in row-major order so the draw sequence matches the checkpoint layout.
  for (int r = 0; r < fan_in; ++r)
    for (int c = 0; c < fan_out; ++c) w(r, c) = u(rng);
  return w;
}

MlpParams init_mlp(std::span<const int> dims, std::span<const Activation> activations,
                   std::mt19937_64& rng) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1)
    throw Error(ErrorCode::InvalidConfig, "init_mlp: need one activation per layer");
  MlpParams p;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    p.layers.push_back({glorot_uniform(dims[i], dims[i + 1], rng),
                        Eigen::RowVectorXd::Zero(dims[i + 1]), activations[i]});
  return p;
}

MlpTape mlp_forward_batch(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != params.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "mlp_forward: input dim " + std::to_string(x.cols()) +
                                                  " != " + std::to_string(params.input_dim()));
  MlpTape tape;
  Eigen::MatrixXd h = x;
  for (const auto& layer : params.layers) {
    tape.inputs.push_back(h);
    Eigen::MatrixXd z = h * layer.weight;
    z.rowwise() += layer.bias;
    h = apply_activation(z, layer.activation);
    tape.pre.push_back(std::move(z));
  }
  tape.output = std::move(h);
  return tape;
}

Eigen::VectorXd mlp_forward(const MlpParams& params, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return mlp_forward_batch(params, x.transpose()).output.row(0).transpose();
}

Eigen::MatrixXd mlp_backward(const MlpParams& params, const MlpTape& tape,
                             const Eigen::Ref<const Eigen::MatrixXd>& d_output, MlpParams& grads) {
  Eigen::MatrixXd d = d_output;
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const auto& layer = params.layers[k];
    const Eigen::MatrixXd out = k + 1 < params.layers.size() ? tape.inputs[k + 1] : tape.output;
    const Eigen::MatrixXd dz = d.cwiseProduct(activation_derivative(tape.pre[k], out, layer.activation));
    grads.layers[k].weight.noalias() += tape.inputs[k].transpose() * dz;
    grads.layers[k].bias += dz.colwise().sum();
    d = dz * layer.weight.transpose();
  }
  return d;
}

void append_views(MlpParams& params, std::vector<ParamView>& out) {
  for (auto& l : params.layers) {
    out.push_back(view_of(l.weight));
    out.push_back(view_of(l.bias));
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be >= 0");
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (weight_decay < 0.0) throw Error(ErrorCode::InvalidConfig, "weight_decay must be >= 0");
}

void grad_step(std::span<ParamView> params, std::span<const ParamView> grads,
               const TrainConfig& config, OptimizerState& state) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::ShapeMismatch, "grad_step: parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].size() != grads[i].size())
      throw Error(ErrorCode::ShapeMismatch, "grad_step: gradient " + std::to_string(i) +
                                                " has the wrong size");

  if (config.optimizer == Optimizer::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= config.learning_rate * (grads[i] + config.weight_decay * params[i]);
    return;
  }

  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.push_back(Eigen::VectorXd::Zero(p.size()));
      state.second_moment.push_back(Eigen::VectorXd::Zero(p.size()));
    }
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::VectorXd g = grads[i] + config.weight_decay * params[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseAbs2();
    params[i].array() -=
        config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEpsilon);
  }
}

}  // namespace ingrex
