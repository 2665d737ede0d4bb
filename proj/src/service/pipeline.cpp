#include "imgquiz/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <set>

#include "imgquiz/digest.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/quizgen.hpp"
#include "imgquiz/text.hpp"
#include "imgquiz/vlmquiz.hpp"

namespace imgquiz::service {

namespace fs = std::filesystem;

namespace {

struct StageFailure {
  int code;
  std::string stage;
  std::string kind;
  std::string message;
};

std::string compact_time(const std::string& iso) {
  std::string out;
  for (char c : iso) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

quizgen::GenerationSettings generation_settings(const RunConfig& config) {
  quizgen::GenerationSettings s;
  s.model_id = config.text_model;
  if (!config.section_allowlist.empty()) s.section_allowlist = config.section_allowlist;
  return s;
}

vlmquiz::QuizSettings quiz_settings(const RunConfig& config) {
  vlmquiz::QuizSettings s;
  s.model_id = config.vision_model;
  s.workers = config.max_in_flight;
  return s;
}

// Gateway plus the grounding scanner that checks every vision prompt.
class Session {
 public:
  Session(const Services& services, const RunConfig& config)
      : gateway_(services.backend, services.cache, static_cast<std::ptrdiff_t>(config.max_in_flight)) {
    gateway_.set_observer([this](const modelio::ModelRequest& req) {
      if (!req.image) return;
      std::lock_guard lock(mutex_);
      for (auto& hit : vlmquiz::grounding_leaks(req, blocklist_)) leaks_.insert(std::move(hit));
    });
  }

  void block(const Concept& c) {
    std::lock_guard lock(mutex_);
    for (auto& alias : quizgen::alias_blocklist(c)) blocklist_.push_back(std::move(alias));
  }

  modelio::Gateway& gateway() { return gateway_; }

  std::vector<std::string> leaks() const {
    std::lock_guard lock(mutex_);
    return {leaks_.begin(), leaks_.end()};
  }

  void record_counts(RunManifest& manifest) const {
    const auto s = gateway_.stats();
    manifest.bump("model_requests", s.requests);
    manifest.bump("cache_hits", s.cache_hits);
    manifest.bump("backend_calls", s.backend_calls);
    manifest.bump("grounding_leaks", leaks().size());
  }

 private:
  modelio::Gateway gateway_;
  mutable std::mutex mutex_;
  std::vector<std::string> blocklist_;
  std::set<std::string> leaks_;
};

Json totals_json(const ScoreMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.image_ids.size(); ++i) {
    rows.push_back({{"image_id", m.image_ids[i]},
                    {"label", std::string(to_string(m.labels[i]))},
                    {"correct", m.correct_count(i)},
                    {"question_count", m.question_count}});
  }
  return rows;
}

Json generation_json(const quizgen::QuizBuild& build) {
  Json rejected = Json::array();
  for (const auto& r : build.rejected) {
    Json v = Json::array();
    for (auto violation : r.violations) v.push_back(std::string(quizgen::to_string(violation)));
    rejected.push_back({{"question_index", r.question_index}, {"violations", v}});
  }
  return {{"model_calls", build.model_calls},
          {"used_full_article", build.used_full_article},
          {"accepted", build.quiz.questions.size()},
          {"rejected", rejected},
          {"raw_outputs", build.raw_outputs}};
}

Json trigger_json(const ranking::TriggerDecision& d) {
  return {{"triggered", d.triggered},
          {"best_target_correct", d.best_target_correct},
          {"best_distractor_correct", d.best_distractor_correct},
          {"difference", static_cast<long long>(d.best_target_correct) -
                             static_cast<long long>(d.best_distractor_correct)},
          {"threshold", d.threshold},
          {"best_target_image", d.best_target_image},
          {"best_distractor_image", d.best_distractor_image}};
}

Json ranking_json(const std::vector<RankedImage>& ranking) {
  Json rows = Json::array();
  for (const auto& r : ranking) rows.push_back(r.image_id);
  return rows;
}

bool local_image_name(const fs::path& p) {
  const std::string ext = text::to_lower(p.extension().string());
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".gif" || ext == ".webp";
}

std::vector<LoadedImage> load_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::not_found, "image directory not found: " + dir.string());
  std::vector<LoadedImage> out;
  auto scan = [&](const fs::path& d, ImageLabel label) {
    if (!fs::is_directory(d)) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && local_image_name(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      LoadedImage img;
      img.bytes = read_file(f).value_or("");
      const auto media = wiki::sniff_media_type(img.bytes);
      if (!media) throw Error(ErrorKind::format, f.string() + " is not a supported image format");
      img.media_type = *media;
      img.candidate.id = f.filename().string();
      img.candidate.file_name = f.filename().string();
      img.candidate.byte_size = img.bytes.size();
      img.candidate.media_type = *media;
      img.candidate.content_hash = sha256_hex(img.bytes);
      img.candidate.label = label;
      out.push_back(std::move(img));
    }
  };
  scan(dir, ImageLabel::target);
  scan(dir / "distractor", ImageLabel::distractor);
  return out;
}

struct Ingested {
  Concept target;
  std::vector<Concept> distractors;
  std::vector<LoadedImage> images;
  std::size_t duplicates = 0;
};

Ingested ingest(const RunConfig& config, const Services& services) {
  wiki::WikiClient client(services.wiki_transport, {config.wiki_api, config.commons_api},
                          {config.max_image_bytes});
  Ingested in;
  in.target = client.fetch_article(config.concept_title);
  for (const auto& d : config.distractors) in.distractors.push_back(client.fetch_article(d));

  std::vector<LoadedImage> loaded;
  if (config.images_from == "wiki") {
    std::set<std::string> seen_names;
    auto collect = [&](const Concept& c, ImageLabel label) {
      for (auto& cand : client.list_candidate_images(c.title, {config.images_per_concept, config.min_usage})) {
        if (!seen_names.insert(cand.file_name).second) continue;
        cand.label = label;
        if (config.fetch_usage && config.min_usage == 0) {
          cand.usage_count = client.fetch_usage_count(cand.file_name);
        }
        loaded.push_back(client.fetch_image_bytes(cand));
      }
    };
    collect(in.target, ImageLabel::target);
    for (const auto& d : in.distractors) collect(d, ImageLabel::distractor);
  } else {
    loaded = load_directory(config.images_from);
  }

  std::set<std::string> hashes;
  for (auto& img : loaded) {
    if (!hashes.insert(img.candidate.content_hash).second) {
      ++in.duplicates;
      continue;
    }
    in.images.push_back(std::move(img));
  }
  if (in.images.empty()) {
    throw Error(ErrorKind::not_found, "no candidate images for " + in.target.title);
  }
  return in;
}

// Contrastive quiz and matrix over `images`; writes its artifacts. Returns
// the ranking, or nullopt with a warning recorded when no contrast exists.
std::optional<std::vector<RankedImage>> contrastive_stage(
    const RunConfig& config, Session& session, RunStore& store, RunManifest& manifest,
    const Concept& target, const std::vector<Concept>& distractors,
    const std::vector<LoadedImage>& images) {
  const std::string& run_id = manifest.run_id();
  quizgen::QuizBuild build;
  try {
    build = quizgen::generate_contrastive_quiz(target, distractors, session.gateway(),
                                               generation_settings(config));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::no_contrast) {
      manifest.add_warning("contrastive_quiz", e.what());
      return std::nullopt;
    }
    throw StageFailure{exit_code::generation, "contrastive_quiz", std::string(to_string(e.kind())), e.what()};
  }
  store.write_artifact(run_id, "contrast.json", contrast_to_json(*build.contrast).dump(2) + "\n");
  store.write_artifact(run_id, "contrastive_quiz.json", serialize_quiz(build.quiz));
  store.write_artifact(run_id, "contrastive_generation.json", generation_json(build).dump(2) + "\n");
  manifest.bump("questions_generated", build.quiz.questions.size());
  Json stage = generation_json(build);
  stage.erase("raw_outputs");
  stage["distractor_concept_ids"] = build.quiz.distractor_concept_ids;
  stage["features"] = contrast_to_json(*build.contrast);
  manifest.add_stage("contrastive_quiz", stage);

  auto filled = vlmquiz::fill_matrix(build.quiz, images, session.gateway(), quiz_settings(config));
  manifest.bump("cells_filled", filled.matrix.cells.size());
  store.write_artifact(run_id, "contrastive_matrix.json", matrix_to_json(filled.matrix).dump(2) + "\n");
  manifest.add_stage("contrastive_matrix", {{"images", filled.matrix.image_ids.size()},
                                            {"questions", filled.matrix.question_count},
                                            {"totals", totals_json(filled.matrix)}});
  if (filled.all_error) {
    manifest.add_warning("contrastive_matrix", "every contrastive cell is an error; keeping the base ranking");
    return std::nullopt;
  }
  auto ranked = ranking::rank_images(filled.matrix);
  store.write_artifact(run_id, "contrastive_ranking.tsv", ranking_to_tsv(ranked));
  return ranked;
}

std::string base_run_id(const Concept& target, const Clock& clock) {
  std::string id = target.id.empty() ? "run" : target.id;
  const std::string t = compact_time(clock());
  if (!t.empty()) id += "-" + t;
  return id;
}

}  // namespace

Services make_services(const RunConfig& config) {
  Services s;
  if (!config.fixtures.empty()) {
    const fs::path root(config.fixtures);
    s.wiki_transport = std::make_shared<wiki::FixtureTransport>(root / "wiki");
    s.backend = modelio::load_script(root / "model_script.json");
    if (config.cache_dir.empty()) s.cache = std::make_shared<modelio::MemoryCache>();
  } else {
    s.wiki_transport = std::make_shared<wiki::LiveTransport>();
    modelio::HttpBackendConfig http;
    http.endpoint = config.endpoint;
    http.api_key = config.api_key;
    s.backend = std::make_shared<modelio::HttpChatBackend>(http);
  }
  if (!s.cache) {
    const fs::path dir = config.cache_dir.empty() ? fs::path(config.out) / "cache" : fs::path(config.cache_dir);
    s.cache = std::make_shared<modelio::DiskCache>(dir);
  }
  return s;
}

RankResult run_pipeline(const RunConfig& config, const Services& services, RunStore& store,
                        const Clock& clock) {
  RankResult result;
  const std::string created = clock();
  std::string run_id = store.reserve_run_id(
      base_run_id(make_concept(config.concept_title, {}), [&] { return created; }));
  RunManifest manifest(run_id, created, config_to_json(config));
  result.run_id = run_id;
  Session session(services, config);

  auto fail = [&](const StageFailure& f) {
    manifest.add_error(f.stage, f.kind, f.message);
    session.record_counts(manifest);
    manifest.finish("failed", f.code, clock());
    store.write_manifest(manifest);
    result.exit_code = f.code;
    result.message = f.stage + ": " + f.message;
    return result;
  };

  try {
    Ingested in;
    try {
      in = ingest(config, services);
    } catch (const Error& e) {
      throw StageFailure{exit_code::ingestion, "ingest", std::string(to_string(e.kind())), e.what()};
    }
    session.block(in.target);
    for (const auto& d : in.distractors) session.block(d);

    Json concepts = Json::array();
    for (const auto& d : in.distractors) concepts.push_back(concept_to_json(d));
    Json candidates = Json::array();
    for (const auto& img : in.images) {
      store.put_image(img.candidate.content_hash, img.bytes);
      candidates.push_back(candidate_to_json(img.candidate));
    }
    store.write_artifact(run_id, "concept.json", concept_to_json(in.target).dump(2) + "\n");
    store.write_artifact(run_id, "distractor_concepts.json", concepts.dump(2) + "\n");
    store.write_artifact(run_id, "candidates.json", candidates.dump(2) + "\n");
    Json distractor_ids = Json::array();
    for (const auto& d : in.distractors) distractor_ids.push_back(d.id);
    manifest.add_stage("ingest", {{"concept_id", in.target.id},
                                  {"title", in.target.title},
                                  {"distractor_concept_ids", distractor_ids},
                                  {"images", in.images.size()},
                                  {"duplicates_dropped", in.duplicates}});
    manifest.bump("images", in.images.size());

    quizgen::QuizBuild base;
    try {
      base = quizgen::generate_base_quiz(in.target, session.gateway(), generation_settings(config));
    } catch (const Error& e) {
      throw StageFailure{exit_code::generation, "base_quiz", std::string(to_string(e.kind())), e.what()};
    }
    store.write_artifact(run_id, "base_quiz.json", serialize_quiz(base.quiz));
    store.write_artifact(run_id, "base_generation.json", generation_json(base).dump(2) + "\n");
    manifest.bump("questions_generated", base.quiz.questions.size());
    {
      Json stage = generation_json(base);
      stage.erase("raw_outputs");
      stage["size_warning"] = base.quiz.size_warning();
      manifest.add_stage("base_quiz", stage);
    }
    if (base.quiz.size_warning()) {
      manifest.add_warning("base_quiz", std::to_string(base.quiz.questions.size()) +
                                            " questions is outside the typical range of 4 to 11");
    }

    auto filled = vlmquiz::fill_matrix(base.quiz, in.images, session.gateway(), quiz_settings(config));
    manifest.bump("cells_filled", filled.matrix.cells.size());
    store.write_artifact(run_id, "base_matrix.json", matrix_to_json(filled.matrix).dump(2) + "\n");
    manifest.add_stage("base_matrix", {{"images", filled.matrix.image_ids.size()},
                                       {"questions", filled.matrix.question_count},
                                       {"totals", totals_json(filled.matrix)}});
    if (filled.all_error) {
      throw StageFailure{exit_code::all_error, "base_matrix", "all_error",
                         "every cell of the base matrix is an error"};
    }
    auto ranked = ranking::rank_images(filled.matrix);
    store.write_artifact(run_id, "base_ranking.tsv", ranking_to_tsv(ranked));
    result.final_ranking = ranked;
    result.final_source = "base";

    bool run_contrastive = false;
    if (in.distractors.empty() || config.contrastive == ContrastiveMode::never) {
      manifest.add_stage("trigger", {{"evaluated", false},
                                     {"reason", in.distractors.empty() ? "no distractor concept"
                                                                       : "contrastive disabled"}});
    } else {
      try {
        const auto decision = ranking::should_trigger_contrastive(filled.matrix, config.threshold);
        result.trigger = decision;
        Json stage = trigger_json(decision);
        stage["evaluated"] = true;
        manifest.add_stage("trigger", stage);
        run_contrastive = decision.triggered || config.contrastive == ContrastiveMode::always;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::labeling) throw;
        manifest.add_stage("trigger", {{"evaluated", false}, {"reason", e.what()}});
        run_contrastive = config.contrastive == ContrastiveMode::always;
      }
    }

    if (run_contrastive) {
      if (auto contrastive = contrastive_stage(config, session, store, manifest, in.target,
                                               in.distractors, in.images)) {
        result.final_ranking = std::move(*contrastive);
        result.final_source = "contrastive";
      }
    }

    store.write_artifact(run_id, "final_ranking.tsv", ranking_to_tsv(result.final_ranking));
    manifest.add_stage("final_ranking", {{"source", result.final_source},
                                         {"order", ranking_json(result.final_ranking)}});
    session.record_counts(manifest);
    for (const auto& leak : session.leaks()) {
      manifest.add_warning("grounding", "vision prompt mentions \"" + leak + "\"");
    }
    manifest.finish("ok", exit_code::ok, clock());
    store.write_manifest(manifest);
    return result;
  } catch (const StageFailure& f) {
    return fail(f);
  } catch (const Error& e) {
    return fail({exit_code::other, "pipeline", std::string(to_string(e.kind())), e.what()});
  } catch (const std::exception& e) {
    return fail({exit_code::other, "pipeline", "internal", e.what()});
  }
}

ContinuationResult continue_contrastive(RunStore& store, const std::string& run_id,
                                        const std::vector<std::string>& distractors,
                                        const Services& services, const Clock& clock,
                                        const std::string& api_key) {
  auto parent = store.read_manifest(run_id);
  if (!parent) throw Error(ErrorKind::not_found, "unknown run " + run_id);
  if (parent->status() != "ok") throw Error(ErrorKind::argument, "run " + run_id + " did not succeed");

  RunConfig config = config_from_json(parent->config());
  config.api_key = api_key;
  std::vector<std::string> titles = distractors;
  if (titles.empty()) {
    if (auto sel = store.read_selection(run_id); sel && sel->contains("distractor")) {
      titles.push_back((*sel)["distractor"].get<std::string>());
    }
  }
  if (titles.empty()) titles = config.distractors;
  if (titles.empty()) throw Error(ErrorKind::argument, "no distractor concept chosen for run " + run_id);

  auto artifact = [&](const char* name) {
    auto text = store.read_artifact(run_id, name);
    if (!text) throw Error(ErrorKind::not_found, "run " + run_id + " has no " + name);
    return *text;
  };
  const Concept target = concept_from_json(Json::parse(artifact("concept.json")));
  const ScoreMatrix base_matrix = matrix_from_json(Json::parse(artifact("base_matrix.json")));
  std::vector<LoadedImage> images;
  for (const auto& c : Json::parse(artifact("candidates.json"))) {
    LoadedImage img;
    img.candidate = candidate_from_json(c);
    auto bytes = store.get_image(img.candidate.content_hash);
    if (!bytes) throw Error(ErrorKind::not_found, "image bytes missing for " + img.candidate.id);
    img.bytes = std::move(*bytes);
    img.media_type = img.candidate.media_type.value_or("image/jpeg");
    images.push_back(std::move(img));
  }

  ContinuationResult out;
  const bool labeled = std::count(base_matrix.labels.begin(), base_matrix.labels.end(), ImageLabel::target) > 0 &&
                       std::count(base_matrix.labels.begin(), base_matrix.labels.end(), ImageLabel::distractor) > 0;
  if (labeled) {
    out.trigger = ranking::should_trigger_contrastive(base_matrix, config.threshold);
    if (!out.trigger->triggered) {
      out.status = "not_triggered";
      return out;
    }
  }

  config.distractors = titles;
  const std::string created = clock();
  const std::string child = store.reserve_run_id(run_id + "-contrastive");
  RunManifest manifest(child, created, config_to_json(config));
  Session session(services, config);
  session.block(target);

  wiki::WikiClient client(services.wiki_transport, {config.wiki_api, config.commons_api},
                          {config.max_image_bytes});
  std::vector<Concept> distractor_concepts;
  for (const auto& t : titles) distractor_concepts.push_back(client.fetch_article(t));
  for (const auto& d : distractor_concepts) session.block(d);

  for (const char* name : {"concept.json", "candidates.json", "base_quiz.json", "base_generation.json",
                           "base_matrix.json", "base_ranking.tsv"}) {
    store.write_artifact(child, name, artifact(name));
  }
  Json concepts = Json::array();
  Json distractor_ids = Json::array();
  for (const auto& d : distractor_concepts) {
    concepts.push_back(concept_to_json(d));
    distractor_ids.push_back(d.id);
  }
  store.write_artifact(child, "distractor_concepts.json", concepts.dump(2) + "\n");
  manifest.add_stage("continuation", {{"parent_run", run_id}});
  manifest.add_stage("ingest", {{"concept_id", target.id},
                                {"title", target.title},
                                {"distractor_concept_ids", distractor_ids},
                                {"images", images.size()},
                                {"duplicates_dropped", 0}});
  manifest.add_stage("base_matrix", {{"images", base_matrix.image_ids.size()},
                                     {"questions", base_matrix.question_count},
                                     {"totals", totals_json(base_matrix)},
                                     {"reused_from", run_id}});
  if (out.trigger) {
    Json stage = trigger_json(*out.trigger);
    stage["evaluated"] = true;
    manifest.add_stage("trigger", stage);
  } else {
    manifest.add_stage("trigger", {{"evaluated", false}, {"reason", "base matrix has no distractor images"}});
  }

  std::optional<std::vector<RankedImage>> ranked;
  try {
    ranked = contrastive_stage(config, session, store, manifest, target, distractor_concepts, images);
  } catch (const StageFailure& f) {
    manifest.add_error(f.stage, f.kind, f.message);
    session.record_counts(manifest);
    manifest.finish("failed", f.code, clock());
    store.write_manifest(manifest);
    throw Error(ErrorKind::generation, f.message);
  }
  out.child_run_id = child;
  std::string source = "contrastive";
  if (ranked) {
    out.status = "completed";
    out.ranking = *ranked;
  } else {
    out.status = "no_contrast";
    out.ranking = ranking::rank_images(base_matrix);
    source = "base";
  }
  store.write_artifact(child, "final_ranking.tsv", ranking_to_tsv(out.ranking));
  manifest.add_stage("final_ranking", {{"source", source}, {"order", ranking_json(out.ranking)}});
  session.record_counts(manifest);
  manifest.finish("ok", exit_code::ok, clock());
  store.write_manifest(manifest);
  return out;
}

}  // namespace imgquiz::service
