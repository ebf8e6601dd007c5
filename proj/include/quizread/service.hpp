#pragma once

#include <memory>
#include <string>

#include "quizread/config.hpp"
#include "quizread/error.hpp"

namespace quizread {

class Store;

// HTTP status for an ApiError carrying `code`.
int http_status_for(ErrorCode code);

// {"code": ..., "message": ...}
std::string api_error_body(ErrorCode code, const std::string& message);

// JSON HTTP API over the document store and the job orchestrator.
//
//   POST /api/documents                  multipart upload (field "file") or raw PDF body
//   GET  /api/documents/{id}             document metadata
//   GET  /api/documents/{id}/file        original bytes
//   GET  /api/documents/{id}/questions   stored sets, optional ?page=&kind=
//   POST /api/documents/{id}/jobs        {kind, questions_per_page, pages?}
//   GET  /api/jobs/{id}                  job status
//   GET  /api/jobs/{id}/events           server-sent events "page" and "done"
//   GET  /api/kinds                      question kinds
//
// When static_dir is configured its files are served under "/".
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the configured address (port 0 picks a free one) and serves on a
  // background thread. Returns the bound port. Throws Error(InvalidConfig)
  // when binding fails.
  int start();
  // Stops serving, cancels pending pages and joins job threads.
  void stop();

  Store& store();
  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace quizread
