#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imgquiz/serialize.hpp"

namespace imgquiz::service {

enum class ContrastiveMode { automatic, always, never };

struct RunConfig {
  std::string concept_title;
  std::vector<std::string> distractors;
  std::string images_from = "wiki";  // "wiki" or a local directory
  std::size_t images_per_concept = 20;
  std::uint64_t min_usage = 0;
  bool fetch_usage = true;
  int threshold = 2;
  ContrastiveMode contrastive = ContrastiveMode::automatic;
  std::string text_model = "gpt-4o";
  std::string vision_model = "gpt-4o";
  std::string endpoint;
  std::string api_key;  // never persisted
  std::string wiki_api = "https://en.wikipedia.org/w/api.php";
  std::string commons_api = "https://commons.wikimedia.org/w/api.php";
  std::string fixtures;   // holds wiki/ and model_script.json
  std::string cache_dir;  // empty: <out>/cache
  std::uint64_t seed = 0;
  std::string out = "imgquiz-runs";
  std::string clock;  // fixed ISO-8601 timestamp for reproducible runs
  std::size_t max_in_flight = 4;
  std::uint64_t max_image_bytes = 8ull << 20;
  std::vector<std::string> section_allowlist;  // empty: default allowlist
};

// Snapshot for the manifest; the API key is left out.
Json config_to_json(const RunConfig& config);

// Accepts numbers or numeric strings for numeric keys. Throws
// Error(argument) on unknown keys or unusable values.
RunConfig config_from_json(const Json& doc);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

// IMGQUIZ_* variables mapped to config keys.
Json config_from_env(const EnvLookup& getenv);

// Flags override environment, environment overrides the file.
Json merge_layers(const Json& file, const Json& env, const Json& flags);

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const EnvLookup& getenv, const Json& flags);

EnvLookup process_env();

using Clock = std::function<std::string()>;

// Returns `fixed` on every call when nonempty, else the current UTC time.
Clock make_clock(const std::string& fixed);

}  // namespace imgquiz::service
