#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ingrex/service.hpp"
#include "schema_validator.hpp"
#include "service_fixture.hpp"

using namespace ingrex;
using json = nlohmann::json;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const std::filesystem::path& root = testing::service_storage().root) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto out = dir / ("ingrex_cli_out_" + std::to_string(::getpid()));
  const auto err = dir / ("ingrex_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = std::string("env -u INGREX_STORAGE_ROOT '") + INGREX_CLI_PATH + "' --storage-root '" +
                          root.string() + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  std::filesystem::remove(out);
  std::filesystem::remove(err);
  return r;
}

std::string service_body(const HttpRequest& request) {
  Registry registry(testing::service_storage().root);
  const auto r = Api(registry).handle(request);
  REQUIRE(r.status == 200);
  return r.body + "\n";
}

}  // namespace

TEST_CASE("generate is deterministic") {
  const auto root = std::filesystem::temp_directory_path() / ("ingrex_cli_gen_" + std::to_string(::getpid()));
  const auto a = cli("generate ba2motifs --num-graphs 10 --seed 7", root);
  REQUIRE(a.exit_code == 0);
  const auto first = slurp(root / "datasets" / "ba2motifs.json");
  const auto b = cli("generate ba2motifs --num-graphs 10 --seed 7", root);
  REQUIRE(b.exit_code == 0);
  CHECK(first == slurp(root / "datasets" / "ba2motifs.json"));
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["dataset_id"] == "ba2motifs");
  std::filesystem::remove_all(root);
}

TEST_CASE("explain commands print the service response byte for byte") {
  const auto node = cli("explain-node --dataset tree_grid --node 5 --top-k 6");
  REQUIRE(node.exit_code == 0);
  CHECK(testing::schema_errors("node_explanation", json::parse(node.out)).empty());
  CHECK(node.out == service_body({"POST", "/api/explain/node", {},
                                  json{{"dataset_id", "tree_grid"}, {"node_id", 5}, {"top_k", 6}}.dump()}));

  const auto graph = cli("explain-graph --dataset ba2motifs --graph 2 --threshold 0.5");
  REQUIRE(graph.exit_code == 0);
  CHECK(graph.out == service_body({"POST", "/api/explain/graph", {},
                                   json{{"dataset_id", "ba2motifs"}, {"graph_id", 2}, {"strategy", "threshold"},
                                        {"value", 0.5}}.dump()}));

  const auto attr = cli("attribute --dataset tree_grid --node 3 --n-samples 12 --seed 5");
  REQUIRE(attr.exit_code == 0);
  CHECK(attr.out == service_body({"POST", "/api/explain/features", {},
                                  json{{"dataset_id", "tree_grid"}, {"node_id", 3}, {"n_samples", 12}, {"seed", 5}}
                                      .dump()}));

  const auto summary = cli("attribute --dataset tree_grid --summary --samples 1,2,3");
  REQUIRE(summary.exit_code == 0);
  CHECK(summary.out == service_body({"POST", "/api/explain/features/summary", {},
                                     json{{"dataset_id", "tree_grid"}, {"sample_ids", {1, 2, 3}}}.dump()}));

  const auto refs = cli("examples --dataset ba2motifs --graph 4 --top-k 3");
  REQUIRE(refs.exit_code == 0);
  CHECK(refs.out == service_body({"GET", "/api/examples/ba2motifs/4", {{"strategy", "top_k"}, {"value", "3"}}, ""}));
}

TEST_CASE("usage errors exit 2, domain errors exit 1") {
  const auto missing = cli("explain-node --node 5");
  CHECK(missing.exit_code == 2);
  CHECK(missing.out.empty());
  CHECK(missing.err.find("--dataset") != std::string::npos);

  CHECK(cli("").exit_code == 2);
  CHECK(cli("frobnicate").exit_code == 2);
  CHECK(cli("explain-node --dataset tree_grid --node five").exit_code == 2);
  CHECK(cli("attribute --dataset tree_grid").exit_code == 2);
  CHECK(cli("explain-graph --dataset ba2motifs --graph 1 --top-k 2 --threshold 0.3").exit_code == 2);

  const auto domain = cli("explain-node --dataset tree_grid --node 999");
  CHECK(domain.exit_code == 1);
  CHECK(domain.out.empty());
  CHECK(std::count(domain.err.begin(), domain.err.end(), '\n') == 1);
  CHECK(cli("explain-node --dataset nope --node 1").exit_code == 1);
  CHECK(cli("train --dataset nope").exit_code == 1);
  CHECK(cli("--help").exit_code == 0);
}
