#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ingrex/checkpoint.hpp"
#include "ingrex/references.hpp"
#include "ingrex/structural.hpp"

namespace ingrex {

/// File layout under the storage root:
///   datasets/<id>.json
///   models/<id>/gcn.json, self_explainable.json, surrogate.json
/// Models are keyed by the id of the dataset they were trained on.
struct StorageLayout {
  std::filesystem::path root;

  std::filesystem::path dataset(const std::string& id) const;
  std::filesystem::path model(const std::string& dataset_id, const std::string& kind) const;
};

/// True for ids made of [A-Za-z0-9_-] (never a path).
bool valid_id(const std::string& id);

/// Lazily loads datasets and checkpoints and keeps them in memory. Each key
/// is loaded at most once even under concurrent first requests; failed loads
/// are not cached.
class Registry {
 public:
  explicit Registry(std::filesystem::path storage_root);

  const StorageLayout& storage() const { return storage_; }
  std::vector<std::string> dataset_ids() const;

  std::shared_ptr<const DatasetBundle> dataset(const std::string& id);
  std::shared_ptr<const GcnModel> gcn(const std::string& id);
  std::shared_ptr<const SelfExplainableGcn> self_explainable(const std::string& id);
  std::shared_ptr<const SurrogateBundle> surrogate(const std::string& id);
  bool has_model(const std::string& id, const std::string& kind) const;

  /// Adjacency used for node explanations (mask-weighted when a
  /// self-explainable model exists).
  std::shared_ptr<const NormalizedAdjacency> node_adjacency(const std::string& id);
  std::shared_ptr<const EmbeddingIndex> embedding_index(const std::string& id);

  /// Number of files read so far, in total or for one key such as
  /// "dataset/tree_grid" or "model/tree_grid/gcn".
  long file_reads() const { return file_reads_.load(); }
  long file_reads(const std::string& key) const;

  template <typename T>
  std::shared_ptr<const T> load_or_get(const std::string& key, const std::function<T()>& load) {
    Slot& slot = slot_for(key);
    std::lock_guard lock(slot.mutex);
    if (!slot.value) slot.value = std::make_shared<const T>(load());
    return std::static_pointer_cast<const T>(slot.value);
  }

 private:
  struct Slot {
    std::mutex mutex;
    std::shared_ptr<const void> value;
  };

  Slot& slot_for(const std::string& key);
  nlohmann::json read_counted(const std::string& key, const std::filesystem::path& path);

  StorageLayout storage_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
  std::map<std::string, long> reads_by_key_;
  std::atomic<long> file_reads_{0};
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Endpoint dispatch shared by the HTTP server and the CLI.
class Api {
 public:
  explicit Api(Registry& registry) : registry_(registry) {}

  HttpResponse handle(const HttpRequest& request) const;

 private:
  Registry& registry_;
};

inline constexpr int kDefaultPort = 8080;
inline constexpr int kDefaultShapSamples = 2048;
inline constexpr int kDefaultSummarySamples = 20;
inline constexpr int kDefaultGraphTopK = 10;

/// HTTP/1.1 front end for `api`. Routes every request through Api::handle.
class HttpServer {
 public:
  explicit HttpServer(const Api& api);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ingrex
