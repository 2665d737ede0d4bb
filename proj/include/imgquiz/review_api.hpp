#pragma once

#include <functional>
#include <memory>
#include <string>

#include "imgquiz/config.hpp"
#include "imgquiz/pipeline.hpp"
#include "imgquiz/store.hpp"

namespace imgquiz::service {

// HTTP review API over a run store:
//   GET  /api/concepts
//   GET  /api/runs
//   GET  /api/runs/{id}
//   GET  /api/runs/{id}/distractor-suggestions
//   POST /api/runs/{id}/distractor      {"title": "..."}
//   POST /api/runs/{id}/contrastive     {"distractor": "..."} -> 202 {"job_id"}
//   GET  /api/jobs/{id}
//   GET  /api/images/{content_hash}
// Contrastive continuations run on a bounded worker pool.
class ReviewApi {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
  };

  ReviewApi(RunStore store, std::function<Services()> make_services, Clock clock,
            std::string api_key = {}, std::size_t workers = 2);
  ~ReviewApi();

  ReviewApi(const ReviewApi&) = delete;
  ReviewApi& operator=(const ReviewApi&) = delete;

  // Routes a request without a socket; the HTTP server uses the same path.
  Reply handle(const std::string& method, const std::string& path, const std::string& body);

  // Blocks until stop() is called or binding fails. Port 0 picks a free port.
  bool listen(const std::string& host, int port);
  int bind(const std::string& host, int port);  // returns the bound port, -1 on failure
  bool listen_after_bind();
  void stop();

  // Blocks until no job is queued or running.
  void wait_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Json run_detail(const RunStore& store, const std::string& run_id);

}  // namespace imgquiz::service
