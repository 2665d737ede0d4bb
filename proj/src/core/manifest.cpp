#include "imgquiz/manifest.hpp"

#include "imgquiz/error.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz {

RunManifest::RunManifest(std::string run_id, std::string created_at, Json config)
    : run_id_(std::move(run_id)), created_at_(std::move(created_at)), config_(std::move(config)) {
  if (run_id_.empty()) throw Error(ErrorKind::argument, "run id is empty");
}

void RunManifest::add_stage(std::string_view name, Json details) {
  Json rec;
  rec["record"] = "stage";
  rec["name"] = std::string(name);
  rec["details"] = std::move(details);
  records_.push_back(std::move(rec));
}

void RunManifest::add_error(std::string_view stage, std::string_view kind,
                            std::string_view message) {
  records_.push_back({{"record", "error"},
                      {"stage", std::string(stage)},
                      {"kind", std::string(kind)},
                      {"message", std::string(message)}});
}

void RunManifest::add_warning(std::string_view stage, std::string_view message) {
  records_.push_back(
      {{"record", "warning"}, {"stage", std::string(stage)}, {"message", std::string(message)}});
}

void RunManifest::bump(std::string_view counter, std::uint64_t by) {
  counters_[std::string(counter)] += by;
}

void RunManifest::finish(std::string_view status, int exit_code, std::string finished_at) {
  status_ = std::string(status);
  exit_code_ = exit_code;
  finished_at_ = std::move(finished_at);
}

std::vector<Json> RunManifest::stages(std::string_view name) const {
  std::vector<Json> out;
  for (const auto& r : records_) {
    if (r.value("record", "") == "stage" && r.value("name", "") == name) out.push_back(r);
  }
  return out;
}

std::string RunManifest::to_jsonl() const {
  std::string out;
  Json head{{"record", "run"}, {"run_id", run_id_}, {"created_at", created_at_}, {"config", config_}};
  out += head.dump() + "\n";
  for (const auto& r : records_) out += r.dump() + "\n";
  Json counts{{"record", "counts"}, {"counters", Json::object()}};
  for (const auto& [k, v] : counters_) counts["counters"][k] = v;
  out += counts.dump() + "\n";
  if (finished()) {
    Json tail{{"record", "finished"},
              {"status", status_},
              {"exit_code", exit_code_},
              {"finished_at", finished_at_}};
    out += tail.dump() + "\n";
  }
  return out;
}

RunManifest RunManifest::from_jsonl(std::string_view text) {
  std::vector<Json> lines;
  for (const auto& line : text::split_lines(text)) {
    if (text::trim(line).empty()) continue;
    try {
      lines.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::parse, std::string("manifest line: ") + e.what());
    }
  }
  if (lines.empty() || lines.front().value("record", "") != "run") {
    throw Error(ErrorKind::parse, "manifest does not start with a run record");
  }
  const Json& head = lines.front();
  RunManifest m(head.value("run_id", ""), head.value("created_at", ""),
                head.value("config", Json::object()));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Json& r = lines[i];
    const std::string kind = r.value("record", "");
    if (kind == "counts") {
      for (auto it = r["counters"].begin(); it != r["counters"].end(); ++it) {
        m.counters_[it.key()] = it.value().get<std::uint64_t>();
      }
    } else if (kind == "finished") {
      m.finish(r.value("status", ""), r.value("exit_code", 0), r.value("finished_at", ""));
    } else {
      m.records_.push_back(r);
    }
  }
  return m;
}

}  // namespace imgquiz
