#include "ingrex/service.hpp"

#include <algorithm>
#include <charconv>
#include <optional>

#include "ingrex/datasets.hpp"
#include "ingrex/layout.hpp"
#include "ingrex/shapley.hpp"
#include "ingrex/wire.hpp"

namespace ingrex {

using json = nlohmann::json;

std::filesystem::path StorageLayout::dataset(const std::string& id) const {
  return root / "datasets" / (id + ".json");
}

std::filesystem::path StorageLayout::model(const std::string& dataset_id, const std::string& kind) const {
  return root / "models" / dataset_id / (kind + ".json");
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

Registry::Registry(std::filesystem::path storage_root) : storage_{std::move(storage_root)} {}

std::vector<std::string> Registry::dataset_ids() const {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(storage_.root / "datasets", ec))
    if (entry.path().extension() == ".json" && valid_id(entry.path().stem().string()))
      ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

Registry::Slot& Registry::slot_for(const std::string& key) {
  std::lock_guard lock(mutex_);
  auto& slot = slots_[key];
  if (!slot) slot = std::make_unique<Slot>();
  return *slot;
}

json Registry::read_counted(const std::string& key, const std::filesystem::path& path) {
  {
    std::lock_guard lock(mutex_);
    ++reads_by_key_[key];
  }
  ++file_reads_;
  return read_json_file(path);
}

long Registry::file_reads(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = reads_by_key_.find(key);
  return it == reads_by_key_.end() ? 0 : it->second;
}

namespace {

void require_id(const std::string& id) {
  if (!valid_id(id)) throw Error(ErrorCode::NotFound, "unknown id '" + id + "'");
}

}  // namespace

std::shared_ptr<const DatasetBundle> Registry::dataset(const std::string& id) {
  require_id(id);
  const std::string key = "dataset/" + id;
  return load_or_get<DatasetBundle>(key, [&] {
    return dataset_from_json(read_counted(key, storage_.dataset(id)), id);
  });
}

bool Registry::has_model(const std::string& id, const std::string& kind) const {
  return valid_id(id) && std::filesystem::exists(storage_.model(id, kind));
}

std::shared_ptr<const GcnModel> Registry::gcn(const std::string& id) {
  require_id(id);
  const std::string key = "model/" + id + "/gcn";
  return load_or_get<GcnModel>(key, [&] { return gcn_from_checkpoint(read_counted(key, storage_.model(id, "gcn"))); });
}

std::shared_ptr<const SelfExplainableGcn> Registry::self_explainable(const std::string& id) {
  require_id(id);
  const std::string key = "model/" + id + "/self_explainable";
  return load_or_get<SelfExplainableGcn>(key, [&] {
    return self_explainable_from_checkpoint(read_counted(key, storage_.model(id, "self_explainable")));
  });
}

std::shared_ptr<const SurrogateBundle> Registry::surrogate(const std::string& id) {
  require_id(id);
  const std::string key = "model/" + id + "/surrogate";
  return load_or_get<SurrogateBundle>(key, [&] {
    return surrogate_from_checkpoint(read_counted(key, storage_.model(id, "surrogate")));
  });
}

std::shared_ptr<const NormalizedAdjacency> Registry::node_adjacency(const std::string& id) {
  const auto data = dataset(id);
  const Graph& g = data->graphs.front();
  if (!has_model(id, "self_explainable"))
    return load_or_get<NormalizedAdjacency>("derived/" + id + "/plain_adjacency",
                                            [&] { return column_normalized_adjacency(g); });
  const auto model = self_explainable(id);
  return load_or_get<NormalizedAdjacency>("derived/" + id + "/masked_adjacency", [&] {
    if (model->base.input_dim() != g.feature_dim())
      throw Error(ErrorCode::IncompatibleModel, "stored model does not match dataset '" + id + "'");
    const auto sym = sym_normalized_adjacency(g);
    return mask_weighted_adjacency(g, sym, model_edge_mask(*model, sym, g.features));
  });
}

std::shared_ptr<const EmbeddingIndex> Registry::embedding_index(const std::string& id) {
  const auto data = dataset(id);
  const auto model = self_explainable(id);
  return load_or_get<EmbeddingIndex>("derived/" + id + "/index", [&] { return build_index(*model, *data); });
}

// ---------------------------------------------------------------------------
// Api
// ---------------------------------------------------------------------------

namespace {

/// Malformed request; maps to 400 naming the offending field.
struct BadRequest {
  std::string field;
  std::string message;
};

struct UnknownRoute {};
struct WrongMethod {};

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest{"", "request body must be a JSON object"};
  return j;
}

const json* field(const json& j, const std::string& name) {
  const auto it = j.find(name);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

std::string require_string(const json& j, const std::string& name) {
  const json* v = field(j, name);
  if (!v) throw BadRequest{name, "missing required field '" + name + "'"};
  if (!v->is_string()) throw BadRequest{name, "'" + name + "' must be a string"};
  return v->get<std::string>();
}

std::optional<long long> optional_int(const json& j, const std::string& name) {
  const json* v = field(j, name);
  if (!v) return std::nullopt;
  if (!v->is_number_integer()) throw BadRequest{name, "'" + name + "' must be an integer"};
  return v->get<long long>();
}

int require_int(const json& j, const std::string& name) {
  const auto v = optional_int(j, name);
  if (!v) throw BadRequest{name, "missing required field '" + name + "'"};
  if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
    throw BadRequest{name, "'" + name + "' is out of range"};
  return static_cast<int>(*v);
}

int bounded_int(const json& j, const std::string& name, int fallback) {
  return field(j, name) ? require_int(j, name) : fallback;
}

std::optional<double> optional_number(const json& j, const std::string& name) {
  const json* v = field(j, name);
  if (!v) return std::nullopt;
  if (!v->is_number()) throw BadRequest{name, "'" + name + "' must be a number"};
  return v->get<double>();
}

std::uint64_t seed_of(const json& j) {
  const json* v = field(j, "seed");
  if (!v) return 0;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
    throw BadRequest{"seed", "'seed' must be a non-negative integer"};
  return v->get<std::uint64_t>();
}

int parse_path_int(const std::string& s, const std::string& name) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw BadRequest{name, "'" + name + "' must be an integer"};
  return value;
}

SelectionStrategy parse_strategy(const std::optional<std::string>& name, const std::optional<double>& value) {
  const std::string kind = name.value_or("top_k");
  if (kind == "top_k") {
    const double k = value.value_or(kDefaultGraphTopK);
    if (k != std::floor(k)) throw BadRequest{"value", "top_k strategy needs an integer value"};
    if (k < 0) throw Error(ErrorCode::InvalidConfig, "top_k must be >= 0");
    return TopK{static_cast<int>(std::min(k, 1e9))};
  }
  if (kind == "threshold") {
    if (!value) throw BadRequest{"value", "threshold strategy needs a value"};
    return Threshold{*value};
  }
  throw BadRequest{"strategy", "strategy must be 'top_k' or 'threshold'"};
}

const Graph& graph_of(const DatasetBundle& data, int graph_id) {
  if (graph_id < 0 || graph_id >= static_cast<int>(data.graphs.size()))
    throw Error(ErrorCode::NotFound, "dataset '" + data.id + "' has no graph " + std::to_string(graph_id));
  return data.graphs[static_cast<std::size_t>(graph_id)];
}

void require_task(const DatasetBundle& data, Task task) {
  if (data.task != task)
    throw Error(ErrorCode::IncompatibleModel, "dataset '" + data.id + "' is a " + to_string(data.task) + " dataset");
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto part = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!part.empty()) parts.push_back(part);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::ParseError:
      return 500;
    default:
      return 422;
  }
}

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

class Handlers {
 public:
  explicit Handlers(Registry& registry) : reg_(registry) {}

  json route(const HttpRequest& req) {
    const auto p = split_path(req.path);
    const auto is = [&](std::initializer_list<const char*> expected) {
      if (p.size() != expected.size()) return false;
      std::size_t i = 0;
      for (const char* e : expected) {
        if (*e != '*' && p[i] != e) return false;
        ++i;
      }
      return true;
    };
    const auto method = [&](const char* m) {
      if (req.method != m) throw WrongMethod{};
    };

    if (is({"api", "health"})) return method("GET"), json{{"status", "ok"}};
    if (is({"api", "datasets"})) return method("GET"), datasets();
    if (is({"api", "datasets", "*", "graph", "*"})) return method("GET"), graph_view(p[2], p[4], req.query);
    if (is({"api", "explain", "node"})) return method("POST"), explain_node_request(parse_body(req.body));
    if (is({"api", "explain", "graph"})) return method("POST"), explain_graph_request(parse_body(req.body));
    if (is({"api", "explain", "features"})) return method("POST"), features(parse_body(req.body));
    if (is({"api", "explain", "features", "summary"})) return method("POST"), summary(parse_body(req.body));
    if (is({"api", "examples", "*", "*"})) return method("GET"), examples(p[2], p[3], req.query);
    throw UnknownRoute{};
  }

 private:
  json datasets() {
    json out = json::array();
    for (const auto& id : reg_.dataset_ids()) {
      const auto d = reg_.dataset(id);
      out.push_back({{"id", d->id},
                     {"task", to_string(d->task)},
                     {"num_classes", d->num_classes},
                     {"num_graphs", d->graphs.size()}});
    }
    return out;
  }

  json graph_view(const std::string& id, const std::string& gid_text, const std::map<std::string, std::string>& q) {
    const int gid = parse_path_int(gid_text, "graph_id");
    const auto data = reg_.dataset(id);
    const Graph& g = graph_of(*data, gid);
    const auto layout_it = q.find("layout");
    if (layout_it == q.end()) return graph_view_json(id, gid, g, nullptr);
    if (layout_it->second != "pca") throw BadRequest{"layout", "layout must be 'pca'"};
    const auto layout = layout_embeddings(*reg_.gcn(id), g);
    return graph_view_json(id, gid, g, &layout);
  }

  json explain_node_request(const json& body) {
    const auto id = require_string(body, "dataset_id");
    const int node = require_int(body, "node_id");
    RwrConfig config;
    config.top_k = bounded_int(body, "top_k", config.top_k);
    config.d = optional_number(body, "d").value_or(config.d);
    const auto data = reg_.dataset(id);
    require_task(*data, Task::NodeClassification);
    const auto adj = reg_.node_adjacency(id);
    return to_json(explain_node(data->graphs.front(), *adj, node, config));
  }

  json explain_graph_request(const json& body) {
    const auto id = require_string(body, "dataset_id");
    const int gid = require_int(body, "graph_id");
    std::optional<std::string> strategy;
    if (field(body, "strategy")) strategy = require_string(body, "strategy");
    const auto s = parse_strategy(strategy, optional_number(body, "value"));
    const auto data = reg_.dataset(id);
    require_task(*data, Task::GraphClassification);
    const Graph& g = graph_of(*data, gid);
    return to_json(explain_graph(*reg_.self_explainable(id), g, gid, s));
  }

  json features(const json& body) {
    const auto id = require_string(body, "dataset_id");
    const int node = require_int(body, "node_id");
    const int n_samples = bounded_int(body, "n_samples", kDefaultShapSamples);
    const auto seed = seed_of(body);
    const auto data = reg_.dataset(id);
    require_task(*data, Task::NodeClassification);
    return to_json(attribute_node(*reg_.surrogate(id), *data, node, n_samples, seed));
  }

  json summary(const json& body) {
    const auto id = require_string(body, "dataset_id");
    const int n_samples = bounded_int(body, "n_samples", kDefaultShapSamples);
    const auto seed = seed_of(body);
    std::optional<std::vector<int>> ids;
    if (const json* v = field(body, "sample_ids")) {
      if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& x) { return x.is_number_integer(); }))
        throw BadRequest{"sample_ids", "'sample_ids' must be an array of integers"};
      ids = v->get<std::vector<int>>();
    }
    const auto data = reg_.dataset(id);
    require_task(*data, Task::NodeClassification);
    if (!ids) {
      const auto& test = data->split.test;
      ids.emplace(test.begin(), test.begin() + std::min<std::size_t>(test.size(), kDefaultSummarySamples));
    }
    return to_json(summarize_attributions(*reg_.surrogate(id), *data, *ids, n_samples, seed));
  }

  json examples(const std::string& id, const std::string& gid_text, const std::map<std::string, std::string>& q) {
    const int gid = parse_path_int(gid_text, "graph_id");
    std::optional<std::string> strategy;
    std::optional<double> value;
    if (const auto it = q.find("strategy"); it != q.end()) strategy = it->second;
    if (const auto it = q.find("value"); it != q.end()) {
      try {
        std::size_t used = 0;
        value = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw BadRequest{"value", "'value' must be a number"};
      }
    }
    const auto s = parse_strategy(strategy, value);
    const auto data = reg_.dataset(id);
    require_task(*data, Task::GraphClassification);
    graph_of(*data, gid);
    return to_json(find_references(*reg_.embedding_index(id), gid, *reg_.self_explainable(id), *data, s));
  }

  Registry& reg_;
};

}  // namespace

HttpResponse Api::handle(const HttpRequest& request) const {
  try {
    return reply(200, Handlers(registry_).route(request));
  } catch (const BadRequest& e) {
    return reply(400, {{"error", "bad_request"}, {"field", e.field.empty() ? json(nullptr) : json(e.field)},
                       {"message", e.message}});
  } catch (const UnknownRoute&) {
    return reply(404, {{"error", "not_found"}, {"message", "no such endpoint"}});
  } catch (const WrongMethod&) {
    return reply(405, {{"error", "method_not_allowed"}});
  } catch (const Error& e) {
    const int status = status_for(e.code());
    if (status == 500) return reply(500, {{"error", "internal"}});
    if (status == 404) return reply(404, {{"error", "not_found"}, {"message", e.what()}});
    return reply(422, {{"error", "unprocessable"}, {"code", to_string(e.code())}, {"message", e.what()}});
  } catch (const std::exception&) {
    return reply(500, {{"error", "internal"}});
  }
}

}  // namespace ingrex
