#include "imgquiz/review_api.hpp"

#include <httplib.h>

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "imgquiz/error.hpp"
#include "imgquiz/ranking.hpp"
#include "imgquiz/text.hpp"
#include "imgquiz/wiki.hpp"

namespace imgquiz::service {

namespace {

using Reply = ReviewApi::Reply;

Reply json_reply(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

Reply error_reply(int status, const std::string& message) {
  return json_reply(status, {{"error", message}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string p = path.substr(0, path.find('?'));
  std::size_t start = 0;
  while (start <= p.size()) {
    auto end = p.find('/', start);
    if (end == std::string::npos) end = p.size();
    if (end > start) parts.push_back(percent_decode(p.substr(start, end - start)));
    start = end + 1;
  }
  return parts;
}

std::optional<Json> parse_artifact(const RunStore& store, const std::string& run_id, const char* name) {
  auto text = store.read_artifact(run_id, name);
  if (!text) return std::nullopt;
  return Json::parse(*text);
}

std::string concept_of(const RunManifest& m, std::string* title = nullptr) {
  std::string id;
  for (const auto& s : m.stages("ingest")) {
    id = s["details"].value("concept_id", "");
    if (title) *title = s["details"].value("title", "");
  }
  return id;
}

Json ranking_rows(const std::vector<RankedImage>& ranking, const std::map<std::string, ImageCandidate>& cands) {
  Json rows = Json::array();
  for (const auto& r : ranking) {
    Json row{{"image_id", r.image_id}, {"correct", r.correct}, {"score", r.score},
             {"rank", r.rank},         {"z_score", r.z_score}};
    if (auto it = cands.find(r.image_id); it != cands.end()) {
      row["label"] = std::string(to_string(it->second.label));
      row["usage_count"] = it->second.usage_count;
      row["popularity"] = ranking::popularity(it->second.usage_count);
      row["content_hash"] = it->second.content_hash;
      row["file_name"] = it->second.file_name;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Json summary(const RunManifest& m) {
  std::string title;
  const std::string concept_id = concept_of(m, &title);
  Json s{{"run_id", m.run_id()},
         {"concept_id", concept_id},
         {"title", title},
         {"status", m.status()},
         {"exit_code", m.exit_code()},
         {"created_at", m.created_at()},
         {"finished_at", m.finished_at()}};
  for (const auto& st : m.stages("final_ranking")) s["final_source"] = st["details"].value("source", "");
  for (const auto& st : m.stages("continuation")) s["parent_run"] = st["details"].value("parent_run", "");
  return s;
}

}  // namespace

Json run_detail(const RunStore& store, const std::string& run_id) {
  const auto manifest = store.read_manifest(run_id);
  if (!manifest) throw Error(ErrorKind::not_found, "unknown run " + run_id);
  Json out;
  out["run"] = summary(*manifest);
  out["run"]["config"] = manifest->config();
  out["manifest"] = manifest->records();
  Json counters = Json::object();
  for (const auto& [k, v] : manifest->counters()) counters[k] = v;
  out["counters"] = counters;

  out["concept"] = parse_artifact(store, run_id, "concept.json").value_or(Json());
  out["distractor_concepts"] = parse_artifact(store, run_id, "distractor_concepts.json").value_or(Json::array());
  const Json cands_doc = parse_artifact(store, run_id, "candidates.json").value_or(Json::array());
  out["candidates"] = cands_doc;
  std::map<std::string, ImageCandidate> cands;
  for (const auto& c : cands_doc) {
    auto cand = candidate_from_json(c);
    cands.emplace(cand.id, cand);
  }

  out["trigger"] = nullptr;
  for (const auto& st : manifest->stages("trigger")) out["trigger"] = st["details"];

  for (const char* kind : {"base", "contrastive"}) {
    const std::string k(kind);
    auto quiz_text = store.read_artifact(run_id, k + "_quiz.json");
    auto matrix = parse_artifact(store, run_id, (k + "_matrix.json").c_str());
    if (!quiz_text || !matrix) {
      out[k] = nullptr;
      continue;
    }
    Json section;
    section["quiz"] = quiz_to_json(parse_quiz(*quiz_text));
    section["matrix"] = *matrix;
    auto ranking_text = store.read_artifact(run_id, k + "_ranking.tsv");
    section["ranking"] = ranking_text ? ranking_rows(ranking_from_tsv(*ranking_text), cands) : Json::array();
    if (k == "contrastive") section["contrast"] = parse_artifact(store, run_id, "contrast.json").value_or(Json());
    out[k] = std::move(section);
  }
  Json final_section;
  final_section["source"] = out["run"].value("final_source", "");
  auto final_text = store.read_artifact(run_id, "final_ranking.tsv");
  final_section["ranking"] = final_text ? ranking_rows(ranking_from_tsv(*final_text), cands) : Json::array();
  out["final"] = std::move(final_section);
  return out;
}

struct ReviewApi::Impl {
  struct Job {
    std::string id;
    std::string run_id;
    std::vector<std::string> distractors;
    std::string state = "queued";
    Json result;
    std::string error;
  };

  Impl(RunStore s, std::function<Services()> f, Clock c, std::string key)
      : store(std::move(s)), make_services(std::move(f)), clock(std::move(c)), api_key(std::move(key)) {}

  RunStore store;
  std::function<Services()> make_services;
  Clock clock;
  std::string api_key;
  httplib::Server server;

  std::mutex mutex;
  std::condition_variable cv;
  std::condition_variable idle_cv;
  std::deque<std::string> queue;
  std::map<std::string, Job> jobs;
  std::size_t active = 0;
  std::size_t next_job = 1;
  bool stopping = false;
  std::vector<std::thread> workers;

  Json job_json(const Job& j) const {
    Json out{{"job_id", j.id}, {"run_id", j.run_id}, {"state", j.state}, {"distractors", j.distractors}};
    out["result"] = j.result.is_null() ? Json() : j.result;
    if (!j.error.empty()) out["error"] = j.error;
    return out;
  }

  void work() {
    for (;;) {
      std::string id;
      std::string run_id;
      std::vector<std::string> distractors;
      {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping && queue.empty()) return;
        id = queue.front();
        queue.pop_front();
        Job& j = jobs.at(id);
        j.state = "running";
        run_id = j.run_id;
        distractors = j.distractors;
        ++active;
      }
      Json result;
      std::string error;
      try {
        const Services services = make_services();
        const ContinuationResult r =
            continue_contrastive(store, run_id, distractors, services, clock, api_key);
        result["status"] = r.status;
        result["child_run_id"] = r.child_run_id ? Json(*r.child_run_id) : Json();
        if (r.trigger) {
          result["trigger"] = {{"triggered", r.trigger->triggered},
                               {"best_target_correct", r.trigger->best_target_correct},
                               {"best_distractor_correct", r.trigger->best_distractor_correct},
                               {"threshold", r.trigger->threshold}};
        }
        Json rows = Json::array();
        for (const auto& ri : r.ranking) {
          rows.push_back({{"image_id", ri.image_id}, {"correct", ri.correct}, {"score", ri.score},
                          {"rank", ri.rank}, {"z_score", ri.z_score}});
        }
        result["ranking"] = rows;
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mutex);
        Job& j = jobs.at(id);
        if (error.empty()) {
          j.state = "done";
          j.result = std::move(result);
        } else {
          j.state = "failed";
          j.error = std::move(error);
        }
        --active;
      }
      idle_cv.notify_all();
    }
  }

  Reply get_runs() {
    Json out = Json::array();
    for (const auto& m : store.list_runs()) out.push_back(summary(m));
    return json_reply(200, out);
  }

  Reply get_concepts() {
    std::map<std::string, Json> by_concept;
    for (const auto& m : store.list_runs()) {
      std::string title;
      const std::string id = concept_of(m, &title);
      if (id.empty()) continue;
      Json& c = by_concept[id];
      if (c.is_null()) c = {{"concept_id", id}, {"title", title}, {"runs", Json::array()}};
      c["runs"].push_back(m.run_id());
      c["latest_run"] = m.run_id();
    }
    Json out = Json::array();
    for (auto& [id, c] : by_concept) out.push_back(std::move(c));
    return json_reply(200, out);
  }

  Reply get_suggestions(const std::string& run_id) {
    const auto manifest = store.read_manifest(run_id);
    if (!manifest) return error_reply(404, "unknown run " + run_id);
    auto concept_doc = parse_artifact(store, run_id, "concept.json");
    if (!concept_doc) return error_reply(404, "run " + run_id + " has no concept");
    const Concept target = concept_from_json(*concept_doc);
    try {
      const RunConfig config = config_from_json(manifest->config());
      const Services services = make_services();
      wiki::WikiClient client(services.wiki_transport, {config.wiki_api, config.commons_api});
      return json_reply(200, {{"run_id", run_id},
                              {"concept_id", target.id},
                              {"suggestions", client.suggest_distractor_concepts(target)}});
    } catch (const std::exception& e) {
      return error_reply(502, std::string("suggestions unavailable: ") + e.what());
    }
  }

  Reply post_distractor(const std::string& run_id, const std::string& body) {
    if (!store.read_manifest(run_id)) return error_reply(404, "unknown run " + run_id);
    Json doc;
    try {
      doc = Json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      return error_reply(400, "body must be JSON");
    }
    if (!doc.is_object() || !doc.contains("title") || !doc["title"].is_string() ||
        text::trim(doc["title"].get<std::string>()).empty()) {
      return error_reply(400, "body needs a nonempty \"title\"");
    }
    const Json selection{{"run_id", run_id}, {"distractor", doc["title"].get<std::string>()}, {"selected_at", clock()}};
    store.write_selection(run_id, selection);
    return json_reply(200, selection);
  }

  Reply post_contrastive(const std::string& run_id, const std::string& body) {
    if (!store.read_manifest(run_id)) return error_reply(404, "unknown run " + run_id);
    std::vector<std::string> distractors;
    if (!text::trim(body).empty()) {
      Json doc;
      try {
        doc = Json::parse(body);
      } catch (const nlohmann::json::parse_error&) {
        return error_reply(400, "body must be JSON");
      }
      if (!doc.is_object()) return error_reply(400, "body must be an object");
      if (doc.contains("distractor")) {
        if (!doc["distractor"].is_string()) return error_reply(400, "\"distractor\" must be a string");
        distractors.push_back(doc["distractor"].get<std::string>());
      }
    }
    std::string id;
    {
      std::lock_guard lock(mutex);
      id = "job-" + std::to_string(next_job++);
      Job j;
      j.id = id;
      j.run_id = run_id;
      j.distractors = distractors;
      jobs.emplace(id, std::move(j));
      queue.push_back(id);
    }
    cv.notify_one();
    return json_reply(202, {{"job_id", id}, {"run_id", run_id}, {"state", "queued"}});
  }

  Reply get_job(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = jobs.find(id);
    if (it == jobs.end()) return error_reply(404, "unknown job " + id);
    return json_reply(200, job_json(it->second));
  }

  Reply get_image(const std::string& hash) {
    auto bytes = store.get_image(hash);
    if (!bytes) return error_reply(404, "unknown image " + hash);
    const auto media = wiki::sniff_media_type(*bytes);
    return {200, std::move(*bytes), media.value_or("application/octet-stream")};
  }
};

ReviewApi::ReviewApi(RunStore store, std::function<Services()> make_services, Clock clock,
                     std::string api_key, std::size_t workers)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(make_services), std::move(clock),
                                   std::move(api_key))) {
  for (std::size_t i = 0; i < std::max<std::size_t>(workers, 1); ++i) {
    impl_->workers.emplace_back([this] { impl_->work(); });
  }
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    const Reply r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/api/.*)", dispatch);
  impl_->server.Post(R"(/api/.*)", dispatch);
}

ReviewApi::~ReviewApi() {
  stop();
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopping = true;
  }
  impl_->cv.notify_all();
  for (auto& t : impl_->workers) t.join();
}

Reply ReviewApi::handle(const std::string& method, const std::string& path, const std::string& body) {
  const auto parts = split_path(path);
  if (parts.size() < 2 || parts[0] != "api") return error_reply(404, "no such endpoint");
  try {
    const std::string& what = parts[1];
    if (method == "GET") {
      if (what == "concepts" && parts.size() == 2) return impl_->get_concepts();
      if (what == "runs" && parts.size() == 2) return impl_->get_runs();
      if (what == "runs" && parts.size() == 3) {
        if (!valid_id(parts[2])) return error_reply(404, "unknown run " + parts[2]);
        return json_reply(200, run_detail(impl_->store, parts[2]));
      }
      if (what == "runs" && parts.size() == 4 && parts[3] == "distractor-suggestions") {
        if (!valid_id(parts[2])) return error_reply(404, "unknown run " + parts[2]);
        return impl_->get_suggestions(parts[2]);
      }
      if (what == "jobs" && parts.size() == 3) return impl_->get_job(parts[2]);
      if (what == "images" && parts.size() == 3) return impl_->get_image(parts[2]);
    } else if (method == "POST") {
      if (what == "runs" && parts.size() == 4 && !valid_id(parts[2])) {
        return error_reply(404, "unknown run " + parts[2]);
      }
      if (what == "runs" && parts.size() == 4 && parts[3] == "distractor") {
        return impl_->post_distractor(parts[2], body);
      }
      if (what == "runs" && parts.size() == 4 && parts[3] == "contrastive") {
        return impl_->post_contrastive(parts[2], body);
      }
    } else {
      return error_reply(405, "method not allowed");
    }
    return error_reply(404, "no such endpoint");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::not_found) return error_reply(404, e.what());
    if (e.kind() == ErrorKind::argument || e.kind() == ErrorKind::parse) return error_reply(400, e.what());
    return error_reply(500, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

bool ReviewApi::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int ReviewApi::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ReviewApi::listen_after_bind() { return impl_->server.listen_after_bind(); }

void ReviewApi::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void ReviewApi::wait_idle() {
  std::unique_lock lock(impl_->mutex);
  impl_->idle_cv.wait(lock, [&] { return impl_->queue.empty() && impl_->active == 0; });
}

}  // namespace imgquiz::service
