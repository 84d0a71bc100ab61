#include <doctest.h>

#include <random>

#include "gcn_fixtures.hpp"
#include "ingrex/datasets.hpp"

using namespace ingrex;

namespace {

Graph path_graph(int n) {
  Graph g;
  g.node_count = n;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  g.features = Eigen::MatrixXd::Ones(n, 2);
  return g;
}

GcnModel one_layer(const Eigen::MatrixXd& w, Activation act) {
  GcnModel m;
  m.layers.push_back({w, Eigen::RowVectorXd::Zero(w.cols()), act});
  return m;
}

GcnModel random_model(Task task, int in, std::vector<int> hidden, int classes, std::mt19937_64& rng) {
  GcnModel m = init_gcn(task, in, hidden, classes, rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& l : m.layers)
    for (auto& b : l.bias) b = n(rng);
  return m;
}

}  // namespace

TEST_CASE("gcn_forward identity propagation") {
  Graph g;
  g.node_count = 3;
  g.features = Eigen::MatrixXd::Random(3, 2).cwiseAbs();
  const auto adj = sym_normalized_adjacency(g);  // no edges: A + I = I
  const auto f = gcn_forward(one_layer(Eigen::MatrixXd::Identity(2, 2), Activation::Relu), adj, g.features);
  CHECK(f.logits == g.features);
}

TEST_CASE("gcn_forward all-zero weights give zero logits") {
  const auto g = path_graph(4);
  const auto f = gcn_forward(one_layer(Eigen::MatrixXd::Zero(2, 3), Activation::Identity),
                             sym_normalized_adjacency(g), g.features);
  CHECK(f.logits == Eigen::MatrixXd::Zero(4, 3));
}

TEST_CASE("gcn_forward two-node path matches the dense chain") {
  auto g = path_graph(2);
  g.features << 1, 2, 3, 4;
  Eigen::MatrixXd w(2, 2);
  w << 1, -1, 0.5, 2;
  const auto f = gcn_forward(one_layer(w, Activation::Identity), sym_normalized_adjacency(g), g.features);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(2, 2, 0.5);
  CHECK((f.logits - s * g.features * w).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(gcn_forward(one_layer(Eigen::MatrixXd::Zero(3, 1), Activation::Relu),
                              sym_normalized_adjacency(g), g.features),
                  Error);
}

TEST_CASE("gcn_forward agrees with a dense oracle on graphs up to 8 nodes") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 8;
    const auto task = trial % 2 ? Task::GraphClassification : Task::NodeClassification;
    const auto g = testing::random_graph(n, 0.4, trial % 3 == 0, 3, rng);
    const auto adj = sym_normalized_adjacency(g);
    const auto m = random_model(task, 3, {5, 4}, 3, rng);
    const auto f = gcn_forward(m, adj, g.features);
    CHECK((f.logits - testing::dense_gcn_logits(m, to_dense(adj.matrix), g.features)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("compute_edge_mask examples") {
  const auto adj = sym_normalized_adjacency(path_graph(2));  // entries (0,0) (0,1) (1,0) (1,1)
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);

  MlpParams zero;
  zero.layers.push_back({Eigen::MatrixXd::Zero(4, 1), Eigen::RowVectorXd::Zero(1), Activation::Identity});
  for (double v : compute_edge_mask(zero, h, adj.matrix).values) CHECK(v == 0.5);

  MlpParams saturated = zero;
  saturated.layers[0].bias[0] = 50.0;
  for (double v : compute_edge_mask(saturated, h, adj.matrix).values) CHECK(std::abs(v - 1.0) <= 1e-9);

  MlpParams fixed = zero;
  fixed.layers[0].weight << 1, 2, -3, 4;
  // Inputs [h_i, h_j]: (0,0)->1-3, (0,1)->1+4, (1,0)->2-3, (1,1)->2+4.
  const auto m = compute_edge_mask(fixed, h, adj.matrix).values;
  REQUIRE(m.size() == 4);
  CHECK(m[0] == doctest::Approx(sigmoid(-2.0)).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(sigmoid(5.0)).epsilon(1e-15));
  CHECK(m[2] == doctest::Approx(sigmoid(-1.0)).epsilon(1e-15));
  CHECK(m[3] == doctest::Approx(sigmoid(6.0)).epsilon(1e-15));

  CHECK_THROWS_AS(compute_edge_mask(fixed, Eigen::MatrixXd::Identity(3, 2), adj.matrix), Error);
}

TEST_CASE("masked forward: unit mask equals the plain forward") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = testing::random_graph(2 + trial % 7, 0.5, false, 3, rng);
    const auto adj = sym_normalized_adjacency(g);
    SelfExplainableGcn sx;
    sx.base = random_model(trial % 2 ? Task::GraphClassification : Task::NodeClassification, 3, {4}, 2, rng);
    const EdgeMask ones{std::vector<double>(adj.matrix.nnz(), 1.0)};
    const Eigen::MatrixXd masked = masked_gcn_forward(sx, adj, g.features, ones);
    CHECK((masked - gcn_forward(sx.base, adj, g.features).logits).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("masked forward: zero mask annihilates propagation") {
  std::mt19937_64 rng(34);
  const auto g = testing::random_graph(5, 0.5, false, 3, rng);
  const auto adj = sym_normalized_adjacency(g);
  SelfExplainableGcn sx;
  sx.base = init_gcn(Task::NodeClassification, 3, std::vector<int>{4}, 2, rng);
  const EdgeMask zeros{std::vector<double>(adj.matrix.nnz(), 0.0)};
  const auto f = gcn_forward(sx.base, adj, g.features, zeros.values);
  CHECK(f.hidden[1] == Eigen::MatrixXd::Zero(5, 4));
  CHECK(masked_gcn_forward(sx, adj, g.features, zeros) == Eigen::MatrixXd::Zero(5, 2));
}

TEST_CASE("masked forward on a 3-node path matches a dense masked oracle") {
  auto g = path_graph(3);
  g.features << 1, 0, 0, 1, 2, -1;
  const auto adj = sym_normalized_adjacency(g);
  EdgeMask mask{std::vector<double>(adj.matrix.nnz(), 1.0)};
  mask.values[0] = 0.0;  // entry (0, 0)
  Eigen::MatrixXd w(2, 2);
  w << 1, 2, -1, 0.5;
  SelfExplainableGcn sx;
  sx.base = one_layer(w, Activation::Identity);
  Eigen::MatrixXd s = to_dense(adj.matrix);
  s(0, 0) = 0.0;
  CHECK((masked_gcn_forward(sx, adj, g.features, mask) - s * g.features * w).cwiseAbs().maxCoeff() <= 1e-12);

  mask.values.pop_back();
  CHECK_THROWS_AS(masked_gcn_forward(sx, adj, g.features, mask), Error);
}

TEST_CASE("supervised loss gradients match finite differences") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    for (auto task : {Task::NodeClassification, Task::GraphClassification}) {
      const auto d = task == Task::NodeClassification ? testing::random_node_dataset(4, 3, 3, rng)
                                                      : testing::random_graph_dataset(3, 4, 3, 3, rng);
      const PreparedDataset data(d);
      GcnModel m = random_model(task, 3, {5, 4}, 3, rng);
      GcnModel grads = m.zeros_like();
      supervised_loss(m, data, d.split.train, &grads);
      std::vector<ParamView> pv, gv;
      append_views(m, pv);
      append_views(grads, gv);
      const double err = testing::max_gradient_error(
          pv, gv, [&] { return supervised_loss(m, data, d.split.train, nullptr); });
      CHECK(err <= 1e-4);
    }
  }
}

TEST_CASE("joint loss gradients (student and mask MLP) match finite differences") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    for (auto task : {Task::NodeClassification, Task::GraphClassification}) {
      const auto d = task == Task::NodeClassification ? testing::random_node_dataset(4, 3, 2, rng)
                                                      : testing::random_graph_dataset(3, 4, 3, 2, rng);
      const PreparedDataset data(d);
      const GcnModel teacher = random_model(task, 3, {4, 4}, 2, rng);
      SelfExplainableGcn sx;
      sx.embedder = teacher;
      sx.base = random_model(task, 3, {4, 4}, 2, rng);
      const int dims[] = {2 * teacher.embedding_dim(), 5, 1};
      const Activation acts[] = {Activation::Relu, Activation::Identity};
      sx.mask_mlp = init_mlp(dims, acts, rng);
      for (auto& l : sx.mask_mlp.layers) l.bias.setConstant(0.1);
      const auto targets = make_joint_targets(teacher, data);

      SelfExplainableGcn grads{{}, sx.base.zeros_like(), sx.mask_mlp.zeros_like()};
      joint_loss(sx, data, targets, d.split.train, 0.3, &grads);
      const auto loss = [&] { return joint_loss(sx, data, targets, d.split.train, 0.3, nullptr).total; };

      std::vector<ParamView> mask_p, mask_g;
      append_views(sx.mask_mlp, mask_p);
      append_views(grads.mask_mlp, mask_g);
      CHECK(testing::max_gradient_error(mask_p, mask_g, loss) <= 1e-4);

      std::vector<ParamView> base_p, base_g;
      append_views(sx.base, base_p);
      append_views(grads.base, base_g);
      CHECK(testing::max_gradient_error(base_p, base_g, loss) <= 1e-4);
    }
  }
}

TEST_CASE("train_gcn learns a linearly separable toy graph") {
  const auto d = testing::separable_node_dataset(20, 3);
  TrainConfig c;
  c.epochs = 200;
  c.seed = 3;
  const auto out = train_gcn(d, c);
  CHECK(out.history.train_accuracy.back() >= 0.95);
  CHECK(out.history.loss.back() < out.history.loss.front());
}

TEST_CASE("train_gcn with lr = 0 leaves parameters at their initialization") {
  const auto d = testing::separable_node_dataset(5, 1);
  TrainConfig c;
  c.epochs = 1;
  c.learning_rate = 0.0;
  c.seed = 8;
  const auto out = train_gcn(d, c);
  std::mt19937_64 rng(8);
  const auto init = init_gcn(Task::NodeClassification, d.feature_dim(), std::vector<int>{16}, 2, rng);
  for (std::size_t k = 0; k < init.layers.size(); ++k) {
    CHECK(out.model.layers[k].weight == init.layers[k].weight);
    CHECK(out.model.layers[k].bias == init.layers[k].bias);
  }
}

TEST_CASE("train_gcn is deterministic and validates its config") {
  const auto d = testing::separable_node_dataset(6, 2);
  TrainConfig c;
  c.epochs = 20;
  const auto a = train_gcn(d, c), b = train_gcn(d, c);
  for (std::size_t k = 0; k < a.model.layers.size(); ++k) CHECK(a.model.layers[k].weight == b.model.layers[k].weight);
  c.epochs = 0;
  CHECK_THROWS_AS(train_gcn(d, c), Error);
  c.epochs = 5;
  c.learning_rate = -1.0;
  CHECK_THROWS_AS(train_gcn(d, c), Error);
}

TEST_CASE("joint loss has zero KL at a teacher-initialized student with unit masks") {
  std::mt19937_64 rng(51);
  const auto d = testing::random_graph_dataset(4, 5, 3, 2, rng);
  const PreparedDataset data(d);
  const auto teacher = random_model(Task::GraphClassification, 3, {4, 4}, 2, rng);
  SelfExplainableGcn sx{teacher, teacher, {}};
  sx.mask_mlp.layers.push_back({Eigen::MatrixXd::Zero(2 * teacher.embedding_dim(), 1),
                                Eigen::RowVectorXd::Constant(1, 60.0), Activation::Identity});
  const auto terms = joint_loss(sx, data, make_joint_targets(teacher, data), d.split.train, 0.0, nullptr);
  CHECK(terms.kl <= 1e-12);
}

TEST_CASE("train_self_explainable: larger sparsity weight lowers the mean mask") {
  const auto d = generate_ba2motifs(10, 8, 5);
  TrainConfig c;
  c.epochs = 200;
  c.seed = 5;
  const auto teacher = train_gcn(d, c).model;
  c.epochs = 60;
  const auto plain = train_self_explainable(teacher, d, c, 0.0);
  const auto sparse = train_self_explainable(teacher, d, c, 100.0);
  CHECK(sparse.history.back().sparsity < plain.history.back().sparsity);
}

TEST_CASE("train_self_explainable rejects a teacher for another feature dimension") {
  std::mt19937_64 rng(2);
  const auto d = generate_ba2motifs(4, 6, 1);
  const auto teacher = init_gcn(Task::GraphClassification, 3, std::vector<int>{4}, 2, rng);
  TrainConfig c;
  c.epochs = 1;
  try {
    train_self_explainable(teacher, d, c, 0.1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
