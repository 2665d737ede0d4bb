#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imgquiz/config.hpp"
#include "imgquiz/pipeline.hpp"
#include "imgquiz/stats.hpp"

namespace imgquiz::service {

// Runs the pipeline into config.out and prints the final ranking.
int cmd_rank(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_rank(const RunConfig& config, const Services& services, std::ostream& out, std::ostream& err);

struct AblateOptions {
  std::string store;
  std::string run_id;
  std::vector<std::size_t> sizes;  // empty: question_count down to 1
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  std::string matrix = "base";  // or "contrastive"
  std::string output;           // empty: stdout
};

int cmd_ablate(const AblateOptions& options, std::ostream& out, std::ostream& err);

struct PopularityRow {
  std::string run_id;
  std::string concept_id;
  std::string image_id;
  ImageLabel label = ImageLabel::unknown;
  std::uint64_t usage_count = 0;
  double popularity = 0.0;
  double score = 0.0;
  double z_score = 0.0;
};

struct ReportData {
  std::vector<PopularityRow> rows;
  std::optional<double> pearson;  // popularity vs z_score across all rows
  std::optional<stats::TestResult> kruskal_wallis;  // target vs distractor scores
  std::optional<stats::TestResult> anova;
  std::size_t target_count = 0;
  std::size_t distractor_count = 0;
  std::vector<std::string> warnings;
};

// Reads final rankings and candidates of the given runs (all successful runs
// when empty). Throws Error(not_found) for an unknown run id.
ReportData build_report(const RunStore& store, const std::vector<std::string>& run_ids);

std::string popularity_to_tsv(const ReportData& report);
std::string summary_to_tsv(const ReportData& report);

struct ReportOptions {
  std::string store;
  std::vector<std::string> run_ids;
  std::string mode = "all";  // "popularity", "groups" or "all"
  std::string output_dir;    // empty: stdout
};

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err);

}  // namespace imgquiz::service
