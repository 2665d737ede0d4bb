#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "imgquiz/config.hpp"
#include "imgquiz/modelio.hpp"
#include "imgquiz/ranking.hpp"
#include "imgquiz/store.hpp"
#include "imgquiz/wiki.hpp"

namespace imgquiz::service {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int other = 1;
inline constexpr int usage = 2;
inline constexpr int ingestion = 3;
inline constexpr int generation = 4;
inline constexpr int all_error = 5;
inline constexpr int not_found = 6;
}  // namespace exit_code

struct Services {
  std::shared_ptr<wiki::HttpTransport> wiki_transport;
  std::shared_ptr<modelio::ModelBackend> backend;
  std::shared_ptr<modelio::ResponseCache> cache;
};

// Fixture mode when config.fixtures is set: <fixtures>/wiki replays the wiki
// and <fixtures>/model_script.json answers model calls, with an in-memory
// cache. Otherwise live transports and a disk cache under the output dir.
Services make_services(const RunConfig& config);

struct RankResult {
  int exit_code = exit_code::ok;
  std::string run_id;
  std::string message;
  std::vector<RankedImage> final_ranking;
  std::string final_source;  // "base" or "contrastive"
  std::optional<ranking::TriggerDecision> trigger;
};

// fetch -> base quiz -> base matrix -> trigger check -> optional contrastive
// quiz and matrix -> final ranking. Artifacts go to the store; the manifest
// is written last, also on failure.
RankResult run_pipeline(const RunConfig& config, const Services& services, RunStore& store,
                        const Clock& clock);

struct ContinuationResult {
  std::string status;  // "completed", "not_triggered" or "no_contrast"
  std::optional<ranking::TriggerDecision> trigger;
  std::optional<std::string> child_run_id;
  std::vector<RankedImage> ranking;
};

// Contrastive stage for a stored run, reusing its base matrix. The result is
// a new run that carries over the parent's base artifacts. Without
// distractor-labeled images in the base matrix the trigger is skipped and
// the contrastive stage runs.
ContinuationResult continue_contrastive(RunStore& store, const std::string& run_id,
                                        const std::vector<std::string>& distractors,
                                        const Services& services, const Clock& clock,
                                        const std::string& api_key = {});

}  // namespace imgquiz::service
