#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "imgquiz/commands.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/review_api.hpp"

using namespace imgquiz;
using namespace imgquiz::service;

namespace {

ReviewApi* g_api = nullptr;

void on_signal(int) {
  if (g_api) g_api->stop();
}

// Pipeline flags shared by `rank` and `serve`; only flags given on the
// command line land in the returned layer.
struct PipelineFlags {
  std::string config_file;
  std::vector<std::string> distractors;
  std::string images_from, contrastive, model, text_model, vision_model, endpoint, wiki_api,
      commons_api, fixtures, cache_dir, out, clock;
  std::size_t images_per_concept = 0, max_in_flight = 0;
  std::uint64_t min_usage = 0, seed = 0;
  int threshold = 0;
  bool no_usage = false;

  std::vector<std::pair<CLI::Option*, std::string>> options;

  void add(CLI::App& app) {
    options.clear();
    app.add_option("--config", config_file, "JSON config file (flags > env > file)")->check(CLI::ExistingFile);
    options.emplace_back(app.add_option("--distractor", distractors, "Distractor concept title (repeatable)"), "distractors");
    options.emplace_back(app.add_option("--images-from", images_from, "\"wiki\" or a local image directory"), "images_from");
    options.emplace_back(app.add_option("--images-per-concept", images_per_concept, "Candidate limit per concept"), "images_per_concept");
    options.emplace_back(app.add_option("--min-usage", min_usage, "Keep only images used on at least this many pages"), "min_usage");
    options.emplace_back(app.add_option("--threshold", threshold, "Contrastive trigger threshold (inclusive)"), "threshold");
    options.emplace_back(app.add_option("--contrastive", contrastive, "auto, always or never")
                             ->check(CLI::IsMember({"auto", "always", "never"})), "contrastive");
    options.emplace_back(app.add_option("--model", model, "Model id for text and vision calls"), "model");
    options.emplace_back(app.add_option("--text-model", text_model, "Model id for quiz generation"), "text_model");
    options.emplace_back(app.add_option("--vision-model", vision_model, "Model id for quiz answering"), "vision_model");
    options.emplace_back(app.add_option("--endpoint", endpoint, "Chat-completions URL"), "endpoint");
    options.emplace_back(app.add_option("--wiki-api", wiki_api, "MediaWiki API URL"), "wiki_api");
    options.emplace_back(app.add_option("--commons-api", commons_api, "Commons API URL"), "commons_api");
    options.emplace_back(app.add_option("--fixtures", fixtures, "Offline fixture directory"), "fixtures");
    options.emplace_back(app.add_option("--cache-dir", cache_dir, "Response cache directory"), "cache_dir");
    options.emplace_back(app.add_option("--seed", seed, "Seed recorded in the manifest"), "seed");
    options.emplace_back(app.add_option("--out", out, "Run store directory"), "out");
    options.emplace_back(app.add_option("--clock", clock, "Fixed timestamp for reproducible runs"), "clock");
    options.emplace_back(app.add_option("--max-in-flight", max_in_flight, "Concurrent model calls"), "max_in_flight");
    app.add_flag("--no-usage", no_usage, "Skip global usage lookups");
  }

  Json layer() const {
    Json j = Json::object();
    for (const auto& [opt, key] : options) {
      if (opt->count() == 0) continue;
      if (key == "distractors") j[key] = opt->as<std::vector<std::string>>();
      else j[key] = opt->as<std::string>();
    }
    if (no_usage) j["fetch_usage"] = false;
    return j;
  }

  RunConfig resolve(const std::string& title) const {
    Json flags = layer();
    if (!title.empty()) flags["concept"] = title;
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    return resolve_config(file, process_env(), flags);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank candidate images for a concept by quizzing a vision model"};
  app.require_subcommand(1);

  auto* rank = app.add_subcommand("rank", "Run the full pipeline for one concept");
  std::string title;
  PipelineFlags rank_flags;
  rank->add_option("concept", title, "Concept (article) title")->required();
  rank_flags.add(*rank);

  auto* ablate = app.add_subcommand("ablate", "Quiz-size stability curve for a stored run");
  AblateOptions ablate_opts;
  ablate->add_option("run_id", ablate_opts.run_id, "Run id")->required();
  ablate->add_option("--store", ablate_opts.store, "Run store directory")->required();
  ablate->add_option("--sizes", ablate_opts.sizes, "Quiz sizes (default: full size down to 1)");
  ablate->add_option("--repetitions", ablate_opts.repetitions, "Samples per size")->check(CLI::PositiveNumber);
  ablate->add_option("--seed", ablate_opts.seed, "Sampling seed");
  ablate->add_flag("--exhaustive", ablate_opts.exhaustive, "Average over every column subset");
  ablate->add_option("--matrix", ablate_opts.matrix, "base or contrastive")
      ->check(CLI::IsMember({"base", "contrastive"}));
  ablate->add_option("--output", ablate_opts.output, "Output TSV (default: stdout)");

  auto* report = app.add_subcommand("report", "Popularity and group-test tables across runs");
  ReportOptions report_opts;
  report->add_option("run_ids", report_opts.run_ids, "Run ids (default: every successful run)");
  report->add_option("--store", report_opts.store, "Run store directory")->required();
  report->add_option("--mode", report_opts.mode, "all, popularity or groups")
      ->check(CLI::IsMember({"all", "popularity", "groups"}));
  report->add_option("--output-dir", report_opts.output_dir, "Directory for TSV files (default: stdout)");

  auto* serve = app.add_subcommand("serve", "Serve the review API over a run store");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t workers = 2;
  PipelineFlags serve_flags;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->add_option("--workers", workers, "Background job workers")->check(CLI::PositiveNumber);
  serve_flags.add(*serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code::usage;
  }

  try {
    if (*rank) return cmd_rank(rank_flags.resolve(title), std::cout, std::cerr);
    if (*ablate) return cmd_ablate(ablate_opts, std::cout, std::cerr);
    if (*report) return cmd_report(report_opts, std::cout, std::cerr);
    if (*serve) {
      const RunConfig config = serve_flags.resolve("");
      ReviewApi api(RunStore(config.out), [config] { return make_services(config); },
                    make_clock(config.clock), config.api_key, workers);
      const int bound = api.bind(host, port);
      if (bound < 0) {
        std::cerr << "error: cannot bind " << host << ":" << port << "\n";
        return exit_code::other;
      }
      std::cout << "listening on http://" << host << ":" << bound << "\n" << std::flush;
      g_api = &api;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      api.listen_after_bind();
      g_api = nullptr;
      return exit_code::ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::argument ? exit_code::usage : exit_code::other;
  }
  return exit_code::usage;
}
