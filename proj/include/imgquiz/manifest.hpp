#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "imgquiz/serialize.hpp"

namespace imgquiz {

// Audit record of one pipeline run, persisted as line-delimited JSON.
// The config snapshot is fixed at construction.
class RunManifest {
 public:
  RunManifest(std::string run_id, std::string created_at, Json config);

  const std::string& run_id() const { return run_id_; }
  const std::string& created_at() const { return created_at_; }
  const Json& config() const { return config_; }

  void add_stage(std::string_view name, Json details);
  void add_error(std::string_view stage, std::string_view kind, std::string_view message);
  void add_warning(std::string_view stage, std::string_view message);
  void bump(std::string_view counter, std::uint64_t by = 1);
  void finish(std::string_view status, int exit_code, std::string finished_at);

  bool finished() const { return !status_.empty(); }
  const std::string& status() const { return status_; }
  int exit_code() const { return exit_code_; }
  const std::string& finished_at() const { return finished_at_; }
  const std::vector<Json>& records() const { return records_; }
  const std::map<std::string, std::uint64_t>& counters() const { return counters_; }

  // Stage records with the given name, in order.
  std::vector<Json> stages(std::string_view name) const;

  std::string to_jsonl() const;
  static RunManifest from_jsonl(std::string_view text);

 private:
  std::string run_id_;
  std::string created_at_;
  Json config_;
  std::vector<Json> records_;
  std::map<std::string, std::uint64_t> counters_;
  std::string status_;
  int exit_code_ = 0;
  std::string finished_at_;
};

}  // namespace imgquiz
