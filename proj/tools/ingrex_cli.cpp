// Command-line driver: dataset generation, training, distillation and every
// explanation endpoint. Explanation commands go through the same Api as the
// HTTP service, so their output is byte-identical to the service responses.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ingrex/pipeline.hpp"
#include "ingrex/service.hpp"

namespace {

using json = nlohmann::json;

constexpr int kUsageError = 2;
constexpr int kDomainError = 1;

ingrex::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

/// Prints a successful body on stdout, otherwise a one-line diagnostic.
int emit(const ingrex::HttpResponse& r) {
  if (r.status == 200) {
    std::cout << r.body << '\n';
    return 0;
  }
  const json body = json::parse(r.body, nullptr, false);
  std::string message = body.is_object() ? body.value("message", body.value("error", "")) : r.body;
  if (body.is_object() && body.contains("field") && body["field"].is_string())
    message += " (field " + body["field"].get<std::string>() + ")";
  std::cerr << "error: " << message << '\n';
  return kDomainError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ingrex: explanations for graph neural network predictions"};
  app.require_subcommand(1);

  std::string storage_root = "storage";
  app.add_option("--storage-root", storage_root, "Directory holding datasets/ and models/")
      ->envname("INGREX_STORAGE_ROOT");

  std::string dataset;
  std::optional<int> graph, node, top_k, n_samples, epochs;
  std::optional<double> d, threshold, lr, sparsity_weight, temperature;
  std::optional<std::uint64_t> seed;

  ingrex::GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  generate->add_option("kind", gen.kind, "tree_grid or ba2motifs")->required()->check(
      CLI::IsMember({"tree_grid", "ba2motifs"}));
  generate->add_option("--id", gen.id, "Dataset id (defaults to the kind)");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--depth", gen.depth, "tree_grid tree depth");
  generate->add_option("--num-grids", gen.num_grids);
  generate->add_option("--num-graphs", gen.num_graphs);
  generate->add_option("--base-size", gen.base_size);

  ingrex::TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train the GCN teacher and the self-explainable student");
  train->add_option("--dataset", dataset)->required();
  train->add_option("--epochs", epochs, "Teacher epochs");
  train->add_option("--joint-epochs", train_opts.joint_epochs);
  train->add_option("--lr", lr);
  train->add_option("--sparsity-weight", sparsity_weight);
  train->add_option("--seed", seed);

  auto* distill = app.add_subcommand("distill", "Distill the teacher into an MLP surrogate");
  distill->add_option("--dataset", dataset)->required();
  distill->add_option("--epochs", epochs);
  distill->add_option("--lr", lr);
  distill->add_option("--temperature", temperature);
  distill->add_option("--seed", seed);

  auto* explain_node = app.add_subcommand("explain-node", "Random-walk explanation of a node prediction");
  explain_node->add_option("--dataset", dataset)->required();
  explain_node->add_option("--node", node)->required();
  explain_node->add_option("--top-k", top_k);
  explain_node->add_option("--d", d, "Keep-going probability");

  auto* explain_graph = app.add_subcommand("explain-graph", "Mask-based explanation of a graph prediction");
  explain_graph->add_option("--dataset", dataset)->required();
  explain_graph->add_option("--graph", graph)->required();
  auto* graph_k = explain_graph->add_option("--top-k", top_k);
  explain_graph->add_option("--threshold", threshold)->excludes(graph_k);

  bool summary = false;
  std::vector<int> samples;
  auto* attribute = app.add_subcommand("attribute", "Shapley feature attribution on the surrogate");
  attribute->add_option("--dataset", dataset)->required();
  auto* node_opt = attribute->add_option("--node", node);
  auto* summary_flag = attribute->add_flag("--summary", summary, "Summarize over --samples (default: test split)");
  attribute->add_option("--samples", samples)->needs(summary_flag)->delimiter(',');
  attribute->add_option("--n-samples", n_samples, "Coalition samples per attribution");
  attribute->add_option("--seed", seed);
  summary_flag->excludes(node_opt);

  auto* examples = app.add_subcommand("examples", "Nearest same-class and different-class reference graphs");
  examples->add_option("--dataset", dataset)->required();
  examples->add_option("--graph", graph)->required();
  auto* examples_k = examples->add_option("--top-k", top_k);
  examples->add_option("--threshold", threshold)->excludes(examples_k);

  std::string host = "0.0.0.0";
  int port = ingrex::kDefaultPort;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", port)->envname("INGREX_PORT")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);

  try {
    app.parse(argc, argv);
    if (attribute->parsed() && !summary && !node) throw CLI::RequiredError("--node or --summary");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const ingrex::StorageLayout storage{storage_root};
  ingrex::Registry registry(storage_root);
  const ingrex::Api api(registry);

  try {
    if (generate->parsed()) {
      std::cout << ingrex::generate_and_save(storage, gen).dump() << '\n';
    } else if (train->parsed()) {
      train_opts.epochs = epochs;
      if (lr) train_opts.learning_rate = *lr;
      if (sparsity_weight) train_opts.sparsity_weight = *sparsity_weight;
      if (seed) train_opts.seed = *seed;
      std::cout << ingrex::train_and_save(storage, dataset, train_opts).dump() << '\n';
    } else if (distill->parsed()) {
      ingrex::DistillRunOptions opts;
      if (epochs) opts.epochs = *epochs;
      if (lr) opts.learning_rate = *lr;
      if (temperature) opts.temperature = *temperature;
      if (seed) opts.seed = *seed;
      std::cout << ingrex::distill_and_save(storage, dataset, opts).dump() << '\n';
    } else if (explain_node->parsed()) {
      json body = {{"dataset_id", dataset}, {"node_id", *node}};
      if (top_k) body["top_k"] = *top_k;
      if (d) body["d"] = *d;
      return emit(api.handle({"POST", "/api/explain/node", {}, body.dump()}));
    } else if (explain_graph->parsed()) {
      json body = {{"dataset_id", dataset}, {"graph_id", *graph}};
      if (top_k) body.update({{"strategy", "top_k"}, {"value", *top_k}});
      if (threshold) body.update({{"strategy", "threshold"}, {"value", *threshold}});
      return emit(api.handle({"POST", "/api/explain/graph", {}, body.dump()}));
    } else if (attribute->parsed()) {
      json body = {{"dataset_id", dataset}};
      if (n_samples) body["n_samples"] = *n_samples;
      if (seed) body["seed"] = *seed;
      if (!summary) {
        body["node_id"] = *node;
        return emit(api.handle({"POST", "/api/explain/features", {}, body.dump()}));
      }
      if (!samples.empty()) body["sample_ids"] = samples;
      return emit(api.handle({"POST", "/api/explain/features/summary", {}, body.dump()}));
    } else if (examples->parsed()) {
      std::map<std::string, std::string> query;
      if (top_k) query = {{"strategy", "top_k"}, {"value", std::to_string(*top_k)}};
      if (threshold) query = {{"strategy", "threshold"}, {"value", json(*threshold).dump()}};
      return emit(api.handle({"GET", "/api/examples/" + dataset + "/" + std::to_string(*graph), query, ""}));
    } else if (serve->parsed()) {
      ingrex::HttpServer server(api);
      const int bound = server.bind(host, port);
      if (bound < 0) throw ingrex::Error(ingrex::ErrorCode::InvalidConfig, "cannot bind " + host);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cout << json{{"status", "listening"}, {"port", bound}}.dump() << std::endl;
      server.listen();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return 0;
}
