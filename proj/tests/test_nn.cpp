#include <doctest.h>

#include <cmath>
#include <random>

#include "ingrex/nn.hpp"
#include "test_util.hpp"

using namespace ingrex;

TEST_CASE("mlp_forward examples") {
  MlpParams zero;
  zero.layers.push_back({Eigen::MatrixXd::Zero(3, 2), Eigen::RowVectorXd::Zero(2), Activation::Identity});
  CHECK(mlp_forward(zero, Eigen::Vector3d(1, 2, 3)) == Eigen::VectorXd::Zero(2));

  MlpParams relu;
  relu.layers.push_back({Eigen::MatrixXd::Identity(2, 2), Eigen::RowVectorXd::Zero(2), Activation::Relu});
  CHECK(mlp_forward(relu, Eigen::Vector2d(-1, 2)) == Eigen::Vector2d(0, 2));

  // [1,1] W1 = [4,-2]; + b1 = [4.5,-3]; relu -> [4.5,0]; W2 -> 4.5; + 0.25.
  MlpParams two;
  Eigen::MatrixXd w1(2, 2), w2(2, 1);
  w1 << 1, 2, 3, -4;
  w2 << 1, 2;
  two.layers.push_back({w1, Eigen::RowVector2d(0.5, -1.0), Activation::Relu});
  two.layers.push_back({w2, Eigen::RowVectorXd::Constant(1, 0.25), Activation::Identity});
  CHECK(mlp_forward(two, Eigen::Vector2d(1, 1))[0] == doctest::Approx(4.75).epsilon(1e-15));

  CHECK_THROWS_AS(mlp_forward(two, Eigen::Vector3d(1, 1, 1)), Error);
}

TEST_CASE("softmax examples") {
  CHECK(softmax(Eigen::VectorXd(Eigen::Vector2d(0, 0))).isApprox(Eigen::Vector2d(0.5, 0.5)));
  const Eigen::VectorXd big = softmax(Eigen::VectorXd(Eigen::Vector2d(1000, 1000)));
  CHECK(big.allFinite());
  CHECK(std::abs(big[0] - 0.5) <= 1e-15);
  const Eigen::VectorXd third = softmax(Eigen::VectorXd(Eigen::Vector2d(std::log(2.0), 0)));
  CHECK(std::abs(third[0] - 2.0 / 3.0) <= 1e-15);
  CHECK(std::abs(third[1] - 1.0 / 3.0) <= 1e-15);
}

TEST_CASE("softmax properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd z(1 + trial % 7);
    for (auto& v : z) v = u(rng);
    const Eigen::VectorXd p = softmax(z);
    CHECK((p.array() > 0).all());
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    const Eigen::VectorXd shifted = softmax(Eigen::VectorXd(z.array() + u(rng)));
    CHECK((p - shifted).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("losses") {
  const Eigen::Vector2d p(0.3, 0.7);
  CHECK(kl_divergence(p, p) == 0.0);
  const Eigen::Vector4d uniform = Eigen::Vector4d::Constant(0.25);
  for (int label = 0; label < 4; ++label)
    CHECK(cross_entropy(uniform, label) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(kl_divergence(Eigen::Vector2d(0.9, 0.1), Eigen::Vector2d(0.5, 0.5)) ==
        doctest::Approx(0.3680642071684971).epsilon(1e-14));
  // Hard teacher, zero student probability: finite thanks to the floor.
  CHECK(std::isfinite(kl_divergence(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1))));
  CHECK_THROWS_AS(kl_divergence(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), Error);
}

TEST_CASE("grad_step examples") {
  TrainConfig sgd;
  sgd.optimizer = Optimizer::Sgd;
  sgd.learning_rate = 0.1;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 1.0), g = Eigen::VectorXd::Constant(1, 2.0);
  std::vector<ParamView> pv{view_of(p)}, gv{view_of(g)};
  OptimizerState state;
  grad_step(pv, gv, sgd, state);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));

  g.setZero();
  grad_step(pv, gv, sgd, state);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));

  TrainConfig adam;
  adam.learning_rate = 0.01;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(1), h = Eigen::VectorXd::Ones(1);
  std::vector<ParamView> qv{view_of(q)}, hv{view_of(h)};
  OptimizerState adam_state;
  grad_step(qv, hv, adam, adam_state);
  // m_hat = v_hat = 1 -> step = lr / (1 + eps).
  CHECK(q[0] == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-15));

  Eigen::VectorXd wrong = Eigen::VectorXd::Ones(2);
  std::vector<ParamView> wv{view_of(wrong)};
  CHECK_THROWS_AS(grad_step(qv, wv, adam, adam_state), Error);
}

TEST_CASE("adam zero gradients keep parameters") {
  TrainConfig adam;
  Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 0.5), h = Eigen::VectorXd::Zero(3);
  std::vector<ParamView> qv{view_of(q)}, hv{view_of(h)};
  OptimizerState s;
  for (int i = 0; i < 5; ++i) grad_step(qv, hv, adam, s);
  CHECK(q == Eigen::VectorXd::Constant(3, 0.5));
}

TEST_CASE("mlp gradients match finite differences") {
  std::mt19937_64 rng(17);
  const int dims[] = {3, 5, 4, 2};
  const Activation acts[] = {Activation::Relu, Activation::Sigmoid, Activation::Identity};
  for (int trial = 0; trial < 3; ++trial) {
    MlpParams params = init_mlp(dims, acts, rng);
    for (auto& l : params.layers) l.bias.setRandom();
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
    const Eigen::MatrixXd weights = Eigen::MatrixXd::Random(4, 2);
    const auto loss = [&] { return mlp_forward_batch(params, x).output.cwiseProduct(weights).sum(); };
    MlpParams grads = params.zeros_like();
    mlp_backward(params, mlp_forward_batch(params, x), weights, grads);
    std::vector<ParamView> pv, gv;
    append_views(params, pv);
    append_views(grads, gv);
    CHECK(testing::max_gradient_error(pv, gv, loss) <= 1e-4);
  }
}

TEST_CASE("init_mlp is seeded and uses the glorot bound") {
  std::mt19937_64 a(1), b(1);
  const int dims[] = {6, 10};
  const Activation acts[] = {Activation::Relu};
  const auto pa = init_mlp(dims, acts, a), pb = init_mlp(dims, acts, b);
  CHECK(pa.layers[0].weight == pb.layers[0].weight);
  CHECK(pa.layers[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 16.0));
}
