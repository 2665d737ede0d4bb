#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "imgquiz/serialize.hpp"

namespace imgquiz::modelio {

struct ImagePayload {
  std::string bytes;
  std::string media_type;
  std::string content_hash;  // keys the cache instead of the bytes
};

struct DecodeSettings {
  double temperature = 0.0;
  int max_output_tokens = 1024;
};

struct ModelRequest {
  std::string model_id;
  std::string system_text;
  std::string user_text;
  std::optional<ImagePayload> image;
  DecodeSettings decode;
};

struct ModelResponse {
  std::string text;
  std::string model_id;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
  bool from_cache = false;
};

// Digest over (model_id, system_text, user_text, image hash or null, decode settings).
std::string cache_key(const ModelRequest& request);

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  // Throws Error(transient | permanent | fixture_miss).
  virtual ModelResponse call(const ModelRequest& request) = 0;
};

// Answers from a fixture: exact cache-key entries first, then the first rule
// whose conditions all hold. Fixture document:
//   {"entries": [{"match": {"digest": "..."} | {"contains": "..." | [...],
//                  "image_hash": "...", "model": "..."}, "response_text": "..."}]}
class ScriptedBackend : public ModelBackend {
 public:
  struct Rule {
    std::vector<std::string> contains;  // all must occur in user_text
    std::optional<std::string> image_hash;
    std::optional<std::string> model_id;
    std::string response_text;
  };

  ScriptedBackend() = default;
  void add_exact(std::string digest, std::string response_text);
  void add_rule(Rule rule);

  ModelResponse call(const ModelRequest& request) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<std::pair<std::string, std::string>> exact_;
  std::vector<Rule> rules_;
  std::atomic<std::size_t> calls_{0};
};

// Throws Error(fixture_load) naming the offending entry.
std::unique_ptr<ScriptedBackend> scripted_from_json(const Json& doc);
std::unique_ptr<ScriptedBackend> load_script(const std::filesystem::path& fixture_path);

struct HttpBackendConfig {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
};

// Chat-completion client: one system message plus a user message whose
// content is a text part and, for vision calls, a base64 data-URL image part.
class HttpChatBackend : public ModelBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig config);
  ModelResponse call(const ModelRequest& request) override;

  // Wire body for a request; exposed for tests.
  static Json request_body(const ModelRequest& request);

  std::size_t attempts() const { return attempts_.load(); }

 private:
  HttpBackendConfig config_;
  std::atomic<std::size_t> attempts_{0};
};

class ResponseCache {
 public:
  virtual ~ResponseCache() = default;
  virtual std::optional<ModelResponse> get(const std::string& key) const = 0;
  virtual void put(const std::string& key, const ModelResponse& response) = 0;
};

class MemoryCache : public ResponseCache {
 public:
  std::optional<ModelResponse> get(const std::string& key) const override;
  void put(const std::string& key, const ModelResponse& response) override;

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, ModelResponse> entries_;
};

// One file per key under <root>/<key[0:2]>/<key>.jsonl. Writes append a
// line; reads take the last complete line.
class DiskCache : public ResponseCache {
 public:
  explicit DiskCache(std::filesystem::path root);
  std::optional<ModelResponse> get(const std::string& key) const override;
  void put(const std::string& key, const ModelResponse& response) override;

 private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path root_;
  static constexpr std::size_t kStripes = 64;
  std::array<std::mutex, kStripes> stripes_;
};

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t backend_calls = 0;
};

// Cache-first front door for every model call.
class Gateway {
 public:
  Gateway(std::shared_ptr<ModelBackend> backend, std::shared_ptr<ResponseCache> cache,
          std::ptrdiff_t max_in_flight = 4);

  ModelResponse complete(const ModelRequest& request);

  // Called with every outgoing request before the cache lookup.
  void set_observer(std::function<void(const ModelRequest&)> observer);

  GatewayStats stats() const;

 private:
  std::shared_ptr<ModelBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  std::counting_semaphore<1024> in_flight_;
  std::function<void(const ModelRequest&)> observer_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> backend_calls_{0};
};

}  // namespace imgquiz::modelio
