#include "imgquiz/store.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "imgquiz/error.hpp"

namespace imgquiz::service {

namespace fs = std::filesystem;

namespace {

void require_id(std::string_view id, std::string_view what) {
  if (!valid_id(id)) throw Error(ErrorKind::argument, "invalid " + std::string(what) + ": " + std::string(id));
}

}  // namespace

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  fs::create_directories(path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << "." << path.filename().string() << ".tmp." << ::getpid() << "."
           << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "." << counter++;
  const fs::path tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::io, "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {}

fs::path RunStore::run_dir(std::string_view run_id) const {
  require_id(run_id, "run id");
  return root_ / "runs" / std::string(run_id);
}

std::string RunStore::reserve_run_id(const std::string& base) const {
  require_id(base, "run id");
  fs::create_directories(root_ / "runs");
  // create_directory fails on an existing entry, so concurrent callers never share an id
  std::string id = base;
  for (int n = 2; !fs::create_directory(root_ / "runs" / id); ++n) id = base + "-" + std::to_string(n);
  return id;
}

void RunStore::write_artifact(std::string_view run_id, std::string_view name,
                              std::string_view content) {
  require_id(name, "artifact name");
  write_file_atomic(run_dir(run_id) / std::string(name), content);
}

std::optional<std::string> RunStore::read_artifact(std::string_view run_id,
                                                   std::string_view name) const {
  if (!valid_id(run_id) || !valid_id(name)) return std::nullopt;
  return read_file(run_dir(run_id) / std::string(name));
}

bool RunStore::has_artifact(std::string_view run_id, std::string_view name) const {
  return valid_id(run_id) && valid_id(name) && fs::exists(run_dir(run_id) / std::string(name));
}

void RunStore::write_manifest(const RunManifest& manifest) {
  write_file_atomic(run_dir(manifest.run_id()) / "manifest.jsonl", manifest.to_jsonl());
}

std::optional<RunManifest> RunStore::read_manifest(std::string_view run_id) const {
  if (!valid_id(run_id)) return std::nullopt;
  auto text = read_file(run_dir(run_id) / "manifest.jsonl");
  if (!text) return std::nullopt;
  return RunManifest::from_jsonl(*text);
}

std::vector<RunManifest> RunStore::list_runs() const {
  std::vector<RunManifest> out;
  const fs::path runs = root_ / "runs";
  if (!fs::is_directory(runs)) return out;
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    if (!valid_id(id)) continue;
    try {
      if (auto m = read_manifest(id)) out.push_back(std::move(*m));
    } catch (const std::exception&) {
      // unreadable manifests are skipped, not fatal for listing
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RunManifest& a, const RunManifest& b) {
    return a.created_at() < b.created_at();
  });
  return out;
}

std::optional<std::string> RunStore::latest_run(std::string_view concept_id) const {
  std::optional<std::string> latest;
  for (const auto& m : list_runs()) {
    for (const auto& stage : m.stages("ingest")) {
      if (stage["details"].value("concept_id", "") == concept_id) latest = m.run_id();
    }
  }
  return latest;
}

void RunStore::put_image(std::string_view content_hash, std::string_view bytes) {
  require_id(content_hash, "content hash");
  const fs::path p = root_ / "images" / std::string(content_hash);
  if (!fs::exists(p)) write_file_atomic(p, bytes);
}

std::optional<std::string> RunStore::get_image(std::string_view content_hash) const {
  if (!valid_id(content_hash)) return std::nullopt;
  return read_file(root_ / "images" / std::string(content_hash));
}

void RunStore::write_selection(std::string_view run_id, const Json& selection) {
  require_id(run_id, "run id");
  write_file_atomic(root_ / "selections" / (std::string(run_id) + ".json"), selection.dump(2) + "\n");
}

std::optional<Json> RunStore::read_selection(std::string_view run_id) const {
  if (!valid_id(run_id)) return std::nullopt;
  auto text = read_file(root_ / "selections" / (std::string(run_id) + ".json"));
  if (!text) return std::nullopt;
  return Json::parse(*text);
}

}  // namespace imgquiz::service
