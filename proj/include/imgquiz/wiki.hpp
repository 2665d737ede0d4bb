#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/model.hpp"
#include "imgquiz/serialize.hpp"
#include "imgquiz/url.hpp"

namespace imgquiz::wiki {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws Error(transient) when the server cannot be reached.
  virtual HttpResponse get(const std::string& url) = 0;
};

struct LiveTransportConfig {
  std::string user_agent = "imgquiz/0.1 (image ranking research tool)";
  std::ptrdiff_t max_concurrent = 2;
  std::chrono::milliseconds politeness_delay{100};
  std::chrono::seconds timeout{30};
};

class LiveTransport : public HttpTransport {
 public:
  explicit LiveTransport(LiveTransportConfig config = {});
  HttpResponse get(const std::string& url) override;

 private:
  LiveTransportConfig config_;
  std::counting_semaphore<64> slots_;
};

// Replays recorded responses. Each *.json file in the directory holds
//   {"request": "<url>", "status": 200, "content_type": "...",
//    "body": "..." | "body_base64": "..." | "body_file": "relative/path"}
// Requests match on canonical_url, so parameter order does not matter.
class FixtureTransport : public HttpTransport {
 public:
  explicit FixtureTransport(const std::filesystem::path& dir);
  HttpResponse get(const std::string& url) override;  // throws Error(fixture_miss)

  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, HttpResponse> responses_;
};

// Passes requests through and writes each response as a fixture file named by
// the digest of its canonical URL.
class RecordingTransport : public HttpTransport {
 public:
  RecordingTransport(std::shared_ptr<HttpTransport> inner, std::filesystem::path dir);
  HttpResponse get(const std::string& url) override;

 private:
  std::shared_ptr<HttpTransport> inner_;
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

std::string fixture_file_name(std::string_view url);

struct Endpoints {
  std::string wiki_api = "https://en.wikipedia.org/w/api.php";
  std::string commons_api = "https://commons.wikimedia.org/w/api.php";
};

struct CandidateOptions {
  std::size_t limit = 20;
  std::uint64_t min_usage = 0;  // 1 keeps only images used on some page
};

struct FetchLimits {
  std::uint64_t max_bytes = 8ull << 20;
};

// Plain-text sections of a rendered article. Infoboxes, navboxes, tables,
// references, figures and edit links are dropped.
struct ParsedHtml {
  std::vector<Section> sections;
  // Article links per section index, in order of appearance.
  std::vector<std::vector<std::string>> links;
};
ParsedHtml parse_article_html(std::string_view html);

class WikiClient {
 public:
  explicit WikiClient(std::shared_ptr<HttpTransport> transport, Endpoints endpoints = {},
                      FetchLimits limits = {});

  // Throws Error(not_found) or Error(ambiguous_title).
  Concept fetch_article(const std::string& title);

  // Article images plus Commons category files, deduplicated by file name,
  // in alphabetical order, with image info filled in.
  std::vector<ImageCandidate> list_candidate_images(const std::string& title,
                                                    const CandidateOptions& options = {});

  // Distinct (wiki, page) pairs in the global usage listing. `project` keeps
  // only wikis whose domain contains it, e.g. "wikipedia".
  std::uint64_t fetch_usage_count(const std::string& file_name,
                                  const std::optional<std::string>& project = std::nullopt);

  // Downloads the original, or the thumbnail when the original exceeds the
  // cap. Writes content_hash and media_type back to the candidate.
  LoadedImage fetch_image_bytes(ImageCandidate& candidate);

  // Lead and visual-section links plus category siblings, ranked by the
  // number of categories shared with the target.
  std::vector<std::string> suggest_distractor_concepts(const Concept& target);

 private:
  Json get_json(const std::string& api, const QueryParams& params);

  std::shared_ptr<HttpTransport> transport_;
  Endpoints endpoints_;
  FetchLimits limits_;
};

// image/jpeg, image/png, image/gif or image/webp from magic bytes; nullopt otherwise.
std::optional<std::string> sniff_media_type(std::string_view bytes);

// "File:Foo_bar.jpg" -> "Foo bar.jpg"
std::string normalize_file_name(std::string_view name);

}  // namespace imgquiz::wiki
