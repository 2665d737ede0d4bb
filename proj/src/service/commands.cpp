#include "imgquiz/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "imgquiz/error.hpp"
#include "imgquiz/ranking.hpp"

namespace imgquiz::service {

namespace fs = std::filesystem;

int cmd_rank(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.concept_title.empty()) {
    err << "error: a concept title is required\n";
    return exit_code::usage;
  }
  Services services;
  try {
    services = make_services(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::fixture_load) return exit_code::ingestion;
    return e.kind() == ErrorKind::argument ? exit_code::usage : exit_code::other;
  }
  return cmd_rank(config, services, out, err);
}

int cmd_rank(const RunConfig& config, const Services& services, std::ostream& out, std::ostream& err) {
  RunStore store(config.out);
  const RankResult r = run_pipeline(config, services, store, make_clock(config.clock));
  out << "run\t" << r.run_id << "\n";
  if (r.exit_code != exit_code::ok) {
    err << "error: " << r.message << "\n";
    return r.exit_code;
  }
  if (r.trigger) {
    out << "trigger\t" << (r.trigger->triggered ? "triggered" : "not triggered") << "\t"
        << r.trigger->best_target_correct << " vs " << r.trigger->best_distractor_correct << "\n";
  }
  out << "final\t" << r.final_source << "\n" << ranking_to_tsv(r.final_ranking);
  return exit_code::ok;
}

int cmd_ablate(const AblateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    RunStore store(options.store);
    if (!valid_id(options.run_id) || !store.read_manifest(options.run_id)) {
      err << "error: unknown run " << options.run_id << "\n";
      return exit_code::not_found;
    }
    if (options.matrix != "base" && options.matrix != "contrastive") {
      err << "error: matrix must be base or contrastive\n";
      return exit_code::usage;
    }
    const auto text = store.read_artifact(options.run_id, options.matrix + "_matrix.json");
    if (!text) {
      err << "error: run " << options.run_id << " has no " << options.matrix << " matrix\n";
      return exit_code::not_found;
    }
    const ScoreMatrix m = matrix_from_json(Json::parse(*text));
    std::vector<std::size_t> sizes = options.sizes;
    if (sizes.empty()) {
      for (std::size_t s = m.question_count; s >= 1; --s) sizes.push_back(s);
    }
    const ranking::StabilityCurve curve =
        options.exhaustive ? ranking::ablate_quiz_size_exhaustive(m, sizes)
                           : ranking::ablate_quiz_size(m, sizes, options.repetitions, options.seed);
    const std::string tsv = ranking::stability_to_tsv(curve);
    if (options.output.empty()) {
      out << tsv;
    } else {
      write_file_atomic(options.output, tsv);
    }
    return exit_code::ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::argument ? exit_code::usage : exit_code::other;
  }
}

ReportData build_report(const RunStore& store, const std::vector<std::string>& run_ids) {
  std::vector<std::string> ids = run_ids;
  if (ids.empty()) {
    for (const auto& m : store.list_runs()) {
      if (m.status() == "ok") ids.push_back(m.run_id());
    }
  }
  ReportData report;
  std::vector<double> target_scores;
  std::vector<double> distractor_scores;
  for (const auto& id : ids) {
    const auto manifest = store.read_manifest(id);
    if (!manifest) throw Error(ErrorKind::not_found, "unknown run " + id);
    const auto ranking_text = store.read_artifact(id, "final_ranking.tsv");
    const auto candidates_text = store.read_artifact(id, "candidates.json");
    if (!ranking_text || !candidates_text) {
      report.warnings.push_back("run " + id + " has no final ranking; skipped");
      continue;
    }
    std::string concept_id;
    for (const auto& s : manifest->stages("ingest")) concept_id = s["details"].value("concept_id", "");
    std::map<std::string, ImageCandidate> candidates;
    for (const auto& c : Json::parse(*candidates_text)) {
      auto cand = candidate_from_json(c);
      candidates.emplace(cand.id, cand);
    }
    for (const auto& r : ranking_from_tsv(*ranking_text)) {
      PopularityRow row;
      row.run_id = id;
      row.concept_id = concept_id;
      row.image_id = r.image_id;
      row.score = r.score;
      row.z_score = r.z_score;
      if (auto it = candidates.find(r.image_id); it != candidates.end()) {
        row.usage_count = it->second.usage_count;
        row.label = it->second.label;
      }
      row.popularity = ranking::popularity(row.usage_count);
      if (row.label == ImageLabel::target) target_scores.push_back(row.score);
      if (row.label == ImageLabel::distractor) distractor_scores.push_back(row.score);
      report.rows.push_back(std::move(row));
    }
  }

  if (report.rows.size() < 2) {
    report.warnings.push_back("fewer than 2 images; no popularity correlation");
  } else {
    std::vector<double> pop, z;
    for (const auto& r : report.rows) {
      pop.push_back(r.popularity);
      z.push_back(r.z_score);
    }
    try {
      report.pearson = stats::pearson(pop, z);
    } catch (const Error& e) {
      report.warnings.push_back(std::string("popularity correlation undefined: ") + e.what());
    }
  }

  report.target_count = target_scores.size();
  report.distractor_count = distractor_scores.size();
  if (target_scores.empty() || distractor_scores.empty()) {
    report.warnings.push_back("group tests need both target and distractor images");
  } else {
    const std::vector<std::vector<double>> groups{target_scores, distractor_scores};
    try {
      report.kruskal_wallis = stats::kruskal_wallis(groups);
    } catch (const Error& e) {
      report.warnings.push_back(std::string("Kruskal-Wallis skipped: ") + e.what());
    }
    try {
      report.anova = stats::anova_oneway(groups);
    } catch (const Error& e) {
      report.warnings.push_back(std::string("ANOVA skipped: ") + e.what());
    }
  }
  return report;
}

std::string popularity_to_tsv(const ReportData& report) {
  std::string out = "run_id\tconcept_id\timage_id\tlabel\tusage_count\tpopularity\tscore\tz_score\n";
  for (const auto& r : report.rows) {
    out += r.run_id + "\t" + r.concept_id + "\t" + r.image_id + "\t" + std::string(to_string(r.label)) +
           "\t" + std::to_string(r.usage_count) + "\t" + format_real(r.popularity) + "\t" +
           format_real(r.score) + "\t" + format_real(r.z_score) + "\n";
  }
  return out;
}

std::string summary_to_tsv(const ReportData& report) {
  auto real = [](double v) { return std::isinf(v) ? std::string("inf") : format_real(v); };
  std::string out = "measure\tvalue\tdf1\tdf2\tp_value\tn\n";
  if (report.pearson) {
    out += "pearson_popularity_z\t" + real(*report.pearson) + "\t\t\t\t" +
           std::to_string(report.rows.size()) + "\n";
  }
  const std::string n = std::to_string(report.target_count) + "+" + std::to_string(report.distractor_count);
  if (report.kruskal_wallis) {
    const auto& t = *report.kruskal_wallis;
    out += "kruskal_wallis_h\t" + real(t.statistic) + "\t" + real(t.df1) + "\t\t" + real(t.p_value) +
           "\t" + n + "\n";
  }
  if (report.anova) {
    const auto& t = *report.anova;
    out += "anova_f\t" + real(t.statistic) + "\t" + real(t.df1) + "\t" + real(t.df2) + "\t" +
           real(t.p_value) + "\t" + n + "\n";
  }
  return out;
}

int cmd_report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  if (options.mode != "all" && options.mode != "popularity" && options.mode != "groups") {
    err << "error: mode must be all, popularity or groups\n";
    return exit_code::usage;
  }
  try {
    RunStore store(options.store);
    for (const auto& id : options.run_ids) {
      if (!valid_id(id) || !store.read_manifest(id)) {
        err << "error: unknown run " << id << "\n";
        return exit_code::not_found;
      }
    }
    const ReportData report = build_report(store, options.run_ids);
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    const bool popularity = options.mode != "groups";
    if (options.output_dir.empty()) {
      if (popularity) out << popularity_to_tsv(report) << "\n";
      out << summary_to_tsv(report);
    } else {
      const fs::path dir(options.output_dir);
      if (popularity) write_file_atomic(dir / "popularity.tsv", popularity_to_tsv(report));
      write_file_atomic(dir / "summary.tsv", summary_to_tsv(report));
    }
    return exit_code::ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::not_found ? exit_code::not_found : exit_code::other;
  }
}

}  // namespace imgquiz::service
