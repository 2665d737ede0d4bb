#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/manifest.hpp"

namespace imgquiz::service {

// Directory tree of runs:
//   <root>/runs/<run_id>/manifest.jsonl and stage artifacts
//   <root>/images/<content_hash>      shared image bytes
//   <root>/selections/<run_id>.json   distractor picks from the review API
// Every write goes through a temporary file and a rename. The manifest is
// written after all artifacts, so a run without one is still in progress.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(std::string_view run_id) const;

  // Run id not yet present: `base`, else `base-2`, `base-3`, ...
  std::string reserve_run_id(const std::string& base) const;

  void write_artifact(std::string_view run_id, std::string_view name, std::string_view content);
  std::optional<std::string> read_artifact(std::string_view run_id, std::string_view name) const;
  bool has_artifact(std::string_view run_id, std::string_view name) const;

  void write_manifest(const RunManifest& manifest);
  // nullopt when the run does not exist or has no manifest yet.
  std::optional<RunManifest> read_manifest(std::string_view run_id) const;

  // Runs with a manifest, ordered by creation time then run id.
  std::vector<RunManifest> list_runs() const;

  // Most recent run for a concept id, by manifest timestamp.
  std::optional<std::string> latest_run(std::string_view concept_id) const;

  void put_image(std::string_view content_hash, std::string_view bytes);
  std::optional<std::string> get_image(std::string_view content_hash) const;

  void write_selection(std::string_view run_id, const Json& selection);
  std::optional<Json> read_selection(std::string_view run_id) const;

 private:
  std::filesystem::path root_;
};

// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::optional<std::string> read_file(const std::filesystem::path& path);

bool valid_id(std::string_view id);

}  // namespace imgquiz::service
