#include "imgquiz/config.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "imgquiz/error.hpp"

namespace imgquiz::service {

namespace {

std::uint64_t as_uint(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t used = 0;
    try {
      const auto n = std::stoull(s, &used);
      if (used == s.size() && !s.empty() && s[0] != '-') return n;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::argument, "config key " + key + " needs a nonnegative integer");
}

int as_int(const Json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t used = 0;
    try {
      const int n = std::stoi(s, &used);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::argument, "config key " + key + " needs an integer");
}

bool as_bool(const Json& v, const std::string& key) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  }
  throw Error(ErrorKind::argument, "config key " + key + " needs a boolean");
}

std::string as_string(const Json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  throw Error(ErrorKind::argument, "config key " + key + " needs a string");
}

std::vector<std::string> as_list(const Json& v, const std::string& key) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(as_string(e, key));
    return out;
  }
  throw Error(ErrorKind::argument, "config key " + key + " needs a list of strings");
}

std::string_view mode_name(ContrastiveMode m) {
  switch (m) {
    case ContrastiveMode::automatic: return "auto";
    case ContrastiveMode::always: return "always";
    case ContrastiveMode::never: return "never";
  }
  return "auto";
}

ContrastiveMode parse_mode(const std::string& s) {
  if (s == "auto") return ContrastiveMode::automatic;
  if (s == "always") return ContrastiveMode::always;
  if (s == "never") return ContrastiveMode::never;
  throw Error(ErrorKind::argument, "contrastive must be auto, always or never, not " + s);
}

}  // namespace

Json config_to_json(const RunConfig& c) {
  Json j;
  j["concept"] = c.concept_title;
  j["distractors"] = c.distractors;
  j["images_from"] = c.images_from;
  j["images_per_concept"] = c.images_per_concept;
  j["min_usage"] = c.min_usage;
  j["fetch_usage"] = c.fetch_usage;
  j["threshold"] = c.threshold;
  j["contrastive"] = mode_name(c.contrastive);
  j["text_model"] = c.text_model;
  j["vision_model"] = c.vision_model;
  j["endpoint"] = c.endpoint;
  j["wiki_api"] = c.wiki_api;
  j["commons_api"] = c.commons_api;
  j["fixtures"] = c.fixtures;
  j["cache_dir"] = c.cache_dir;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["clock"] = c.clock;
  j["max_in_flight"] = c.max_in_flight;
  j["max_image_bytes"] = c.max_image_bytes;
  j["section_allowlist"] = c.section_allowlist;
  return j;
}

RunConfig config_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::argument, "config must be an object");
  RunConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "concept") c.concept_title = as_string(v, key);
    else if (key == "distractors") c.distractors = as_list(v, key);
    else if (key == "images_from") c.images_from = as_string(v, key);
    else if (key == "images_per_concept") c.images_per_concept = as_uint(v, key);
    else if (key == "min_usage") c.min_usage = as_uint(v, key);
    else if (key == "fetch_usage") c.fetch_usage = as_bool(v, key);
    else if (key == "threshold") c.threshold = as_int(v, key);
    else if (key == "contrastive") c.contrastive = parse_mode(as_string(v, key));
    else if (key == "model") c.text_model = c.vision_model = as_string(v, key);
    else if (key == "text_model") c.text_model = as_string(v, key);
    else if (key == "vision_model") c.vision_model = as_string(v, key);
    else if (key == "endpoint") c.endpoint = as_string(v, key);
    else if (key == "api_key") c.api_key = as_string(v, key);
    else if (key == "wiki_api") c.wiki_api = as_string(v, key);
    else if (key == "commons_api") c.commons_api = as_string(v, key);
    else if (key == "fixtures") c.fixtures = as_string(v, key);
    else if (key == "cache_dir") c.cache_dir = as_string(v, key);
    else if (key == "seed") c.seed = as_uint(v, key);
    else if (key == "out") c.out = as_string(v, key);
    else if (key == "clock") c.clock = as_string(v, key);
    else if (key == "max_in_flight") c.max_in_flight = as_uint(v, key);
    else if (key == "max_image_bytes") c.max_image_bytes = as_uint(v, key);
    else if (key == "section_allowlist") c.section_allowlist = as_list(v, key);
    else throw Error(ErrorKind::argument, "unknown config key: " + key);
  }
  if (c.images_per_concept < 1) throw Error(ErrorKind::argument, "images_per_concept must be >= 1");
  if (c.max_in_flight < 1) throw Error(ErrorKind::argument, "max_in_flight must be >= 1");
  return c;
}

Json config_from_env(const EnvLookup& getenv) {
  static const std::pair<const char*, const char*> kVars[] = {
      {"IMGQUIZ_ENDPOINT", "endpoint"},         {"IMGQUIZ_API_KEY", "api_key"},
      {"IMGQUIZ_MODEL", "model"},               {"IMGQUIZ_TEXT_MODEL", "text_model"},
      {"IMGQUIZ_VISION_MODEL", "vision_model"}, {"IMGQUIZ_FIXTURES", "fixtures"},
      {"IMGQUIZ_CACHE_DIR", "cache_dir"},       {"IMGQUIZ_OUT", "out"},
      {"IMGQUIZ_CLOCK", "clock"},               {"IMGQUIZ_WIKI_API", "wiki_api"},
      {"IMGQUIZ_COMMONS_API", "commons_api"},   {"IMGQUIZ_THRESHOLD", "threshold"},
      {"IMGQUIZ_SEED", "seed"},                 {"IMGQUIZ_MAX_IN_FLIGHT", "max_in_flight"}};
  Json out = Json::object();
  for (const auto& [var, key] : kVars) {
    if (auto v = getenv(var); v && !v->empty()) out[key] = *v;
  }
  return out;
}

Json merge_layers(const Json& file, const Json& env, const Json& flags) {
  Json out = Json::object();
  for (const Json* layer : {&file, &env, &flags}) {
    if (layer->is_null()) continue;
    if (!layer->is_object()) throw Error(ErrorKind::argument, "config layer must be an object");
    // "model" sets both models; a more specific key in the same or a later layer wins.
    if (layer->contains("model")) {
      out.erase("text_model");
      out.erase("vision_model");
    }
    for (const auto& [k, v] : layer->items()) out[k] = v;
  }
  if (out.contains("model")) {
    const Json model = out["model"];
    out.erase("model");
    if (!out.contains("text_model")) out["text_model"] = model;
    if (!out.contains("vision_model")) out["vision_model"] = model;
  }
  return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const EnvLookup& getenv, const Json& flags) {
  Json file = Json::object();
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw Error(ErrorKind::argument, "cannot read config file " + config_file->string());
    try {
      file = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::argument, "config file " + config_file->string() + ": " + e.what());
    }
  }
  return config_from_json(merge_layers(file, config_from_env(getenv), flags));
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name)) return std::string(v);
    return std::nullopt;
  };
}

Clock make_clock(const std::string& fixed) {
  if (!fixed.empty()) return [fixed] { return fixed; };
  return [] {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

}  // namespace imgquiz::service
