#include "imgquiz/modelio.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "imgquiz/digest.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/text.hpp"
#include "imgquiz/url.hpp"

namespace imgquiz::modelio {

std::string cache_key(const ModelRequest& request) {
  FieldHasher h;
  h.add("chat-v1").add(request.model_id).add(request.system_text).add(request.user_text);
  if (request.image) {
    h.add(request.image->content_hash.empty() ? sha256_hex(request.image->bytes)
                                              : request.image->content_hash);
  } else {
    h.add_null();
  }
  char decode[64];
  std::snprintf(decode, sizeof decode, "%.17g/%d", request.decode.temperature,
                request.decode.max_output_tokens);
  h.add(decode);
  return h.hex();
}

// ---------------------------------------------------------------- scripted

void ScriptedBackend::add_exact(std::string digest, std::string response_text) {
  exact_.emplace_back(std::move(digest), std::move(response_text));
}

void ScriptedBackend::add_rule(Rule rule) { rules_.push_back(std::move(rule)); }

ModelResponse ScriptedBackend::call(const ModelRequest& request) {
  ++calls_;
  const std::string key = cache_key(request);
  for (const auto& [digest, text] : exact_) {
    if (digest == key) return {text, request.model_id, 0, 0, false};
  }
  const std::string image_hash = request.image ? request.image->content_hash : std::string();
  for (const auto& rule : rules_) {
    if (rule.model_id && *rule.model_id != request.model_id) continue;
    if (rule.image_hash && *rule.image_hash != image_hash) continue;
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (request.user_text.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return {rule.response_text, request.model_id, 0, 0, false};
  }
  std::string preview = request.user_text.substr(0, 120);
  throw Error(ErrorKind::fixture_miss, "no scripted response for request " + key.substr(0, 16) +
                                           " (user_text starts: \"" + preview + "\")");
}

std::unique_ptr<ScriptedBackend> scripted_from_json(const Json& doc) {
  auto backend = std::make_unique<ScriptedBackend>();
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw Error(ErrorKind::fixture_load, "fixture must be an object with an \"entries\" array");
  }
  const auto& entries = doc["entries"];
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string where = "fixture entry " + std::to_string(i) + ": ";
    if (!e.is_object() || !e.contains("match") || !e["match"].is_object()) {
      throw Error(ErrorKind::fixture_load, where + "missing \"match\" object");
    }
    if (!e.contains("response_text") || !e["response_text"].is_string()) {
      throw Error(ErrorKind::fixture_load, where + "missing string \"response_text\"");
    }
    const auto& m = e["match"];
    std::string response = e["response_text"].get<std::string>();
    if (m.contains("digest")) {
      if (!m["digest"].is_string()) throw Error(ErrorKind::fixture_load, where + "digest must be a string");
      backend->add_exact(m["digest"].get<std::string>(), std::move(response));
      continue;
    }
    ScriptedBackend::Rule rule;
    if (m.contains("contains")) {
      const auto& c = m["contains"];
      if (c.is_string()) {
        rule.contains.push_back(c.get<std::string>());
      } else if (c.is_array() && std::all_of(c.begin(), c.end(), [](const Json& v) { return v.is_string(); })) {
        rule.contains = c.get<std::vector<std::string>>();
      } else {
        throw Error(ErrorKind::fixture_load, where + "contains must be a string or string array");
      }
    }
    if (m.contains("image_hash")) rule.image_hash = m["image_hash"].get<std::string>();
    if (m.contains("model")) rule.model_id = m["model"].get<std::string>();
    if (rule.contains.empty() && !rule.image_hash && !rule.model_id) {
      throw Error(ErrorKind::fixture_load, where + "match has no digest, contains, image_hash or model");
    }
    rule.response_text = std::move(response);
    backend->add_rule(std::move(rule));
  }
  return backend;
}

std::unique_ptr<ScriptedBackend> load_script(const std::filesystem::path& fixture_path) {
  std::ifstream in(fixture_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::fixture_load, "cannot open fixture " + fixture_path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::fixture_load, fixture_path.string() + ": " + e.what());
  }
  return scripted_from_json(doc);
}

// ---------------------------------------------------------------- http

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorKind::argument, "model endpoint not configured");
  if (config_.max_attempts < 1) config_.max_attempts = 1;
}

Json HttpChatBackend::request_body(const ModelRequest& request) {
  Json messages = Json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  Json content = Json::array();
  content.push_back({{"type", "text"}, {"text", request.user_text}});
  if (request.image) {
    const std::string url =
        "data:" + request.image->media_type + ";base64," + base64_encode(request.image->bytes);
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  Json body;
  body["model"] = request.model_id;
  body["messages"] = std::move(messages);
  body["temperature"] = request.decode.temperature;
  body["max_tokens"] = request.decode.max_output_tokens;
  return body;
}

ModelResponse HttpChatBackend::call(const ModelRequest& request) {
  const UrlParts url = split_url(config_.endpoint);
  const std::string body = request_body(request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    ++attempts_;
    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorKind::permanent, "model endpoint returned HTTP " + std::to_string(res->status) +
                                            ": " + res->body.substr(0, 300));
    }
    Json doc;
    try {
      doc = Json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::permanent, std::string("model endpoint returned non-JSON: ") + e.what());
    }
    ModelResponse out;
    out.model_id = doc.value("model", request.model_id);
    try {
      const auto& content = doc.at("choices").at(0).at("message").at("content");
      out.text = content.is_string() ? content.get<std::string>() : std::string();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::permanent, "model response has no choices[0].message.content");
    }
    if (out.text.empty()) throw Error(ErrorKind::permanent, "model returned empty text");
    if (auto u = doc.find("usage"); u != doc.end() && u->is_object()) {
      out.prompt_tokens = u->value("prompt_tokens", std::uint64_t{0});
      out.completion_tokens = u->value("completion_tokens", std::uint64_t{0});
    }
    return out;
  }
  throw Error(ErrorKind::transient, "model endpoint failed after " +
                                        std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

// ---------------------------------------------------------------- caches

namespace {

Json response_to_json(const std::string& key, const ModelResponse& r) {
  return {{"key", key},
          {"model_id", r.model_id},
          {"text", r.text},
          {"prompt_tokens", r.prompt_tokens},
          {"completion_tokens", r.completion_tokens}};
}

}  // namespace

std::optional<ModelResponse> MemoryCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void MemoryCache::put(const std::string& key, const ModelResponse& response) {
  std::unique_lock lock(mutex_);
  entries_[key] = response;
}

DiskCache::DiskCache(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path DiskCache::path_for(const std::string& key) const {
  return root_ / key.substr(0, 2) / (key + ".jsonl");
}

std::optional<ModelResponse> DiskCache::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  std::optional<ModelResponse> last;
  for (const auto& line : text::split_lines(buf.str())) {
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (j.value("key", "") != key) continue;
      ModelResponse r;
      r.text = j.value("text", "");
      r.model_id = j.value("model_id", "");
      r.prompt_tokens = j.value("prompt_tokens", std::uint64_t{0});
      r.completion_tokens = j.value("completion_tokens", std::uint64_t{0});
      last = std::move(r);
    } catch (const nlohmann::json::exception&) {
      // a torn trailing line from an interrupted writer
    }
  }
  return last;
}

void DiskCache::put(const std::string& key, const ModelResponse& response) {
  const auto path = path_for(key);
  const std::string line = response_to_json(key, response).dump() + "\n";
  std::lock_guard lock(stripes_[std::hash<std::string>{}(key) % kStripes]);
  std::filesystem::create_directories(path.parent_path());
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error(ErrorKind::io, "cannot open cache file " + path.string());
  const ssize_t written = ::write(fd, line.data(), line.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size())) {
    throw Error(ErrorKind::io, "short write to cache file " + path.string());
  }
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(std::shared_ptr<ModelBackend> backend, std::shared_ptr<ResponseCache> cache,
                 std::ptrdiff_t max_in_flight)
    : backend_(std::move(backend)),
      cache_(std::move(cache)),
      in_flight_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)) {
  if (!backend_) throw Error(ErrorKind::argument, "gateway needs a backend");
}

void Gateway::set_observer(std::function<void(const ModelRequest&)> observer) {
  observer_ = std::move(observer);
}

ModelResponse Gateway::complete(const ModelRequest& request) {
  ++requests_;
  if (observer_) observer_(request);
  const std::string key = cache_key(request);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      hit->from_cache = true;
      return *hit;
    }
  }
  in_flight_.acquire();
  ModelResponse response;
  try {
    ++backend_calls_;
    response = backend_->call(request);
  } catch (...) {
    in_flight_.release();
    throw;
  }
  in_flight_.release();
  response.from_cache = false;
  if (response.model_id.empty()) response.model_id = request.model_id;
  if (cache_ && !response.text.empty()) cache_->put(key, response);
  return response;
}

GatewayStats Gateway::stats() const {
  return {requests_.load(), cache_hits_.load(), backend_calls_.load()};
}

}  // namespace imgquiz::modelio
