// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "covmis/annotate.hpp"

namespace covmis {

/// Text shown next to each task.
struct TaskTexts {
  std::map<std::string, std::string> misinfo;  // misinfo_id -> item text
  std::map<std::string, std::string> tweets;   // tweet_id -> normalized text
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // UTF-8 JSON, or plain text for /guidelines
  std::string content_type = "application/json";
};

/// HTTP+JSON front end of an AnnotationStore.
///
///   GET  /tasks/next?annotator=ID
///   POST /labels              {"pair_id", "annotator", "label"}
///   GET  /agreement[?batch=k]
///   GET  /review/k
///   POST /review/k/resolve    {"pair_id", "label", "escalated"?}
///   GET  /guidelines
///
/// The annotator may also be given in an "X-Annotator" header. Errors are
/// {"code", "message"} with a 4xx status. Writes are serialized; reads use
/// an immutable snapshot and never block on writers. When a log path is set
/// every accepted event is appended to it as one JSON line.
class AnnotationService {
 public:
  AnnotationService(AnnotationStore store, TaskTexts texts,
                    std::optional<std::filesystem::path> log_path = std::nullopt);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  HttpResponse handle(const HttpRequest& req);

  /// Current state snapshot.
  std::shared_ptr<const AnnotationStore> snapshot() const;

  /// Binds and serves until stop(). Port 0 picks a free port; bound_port()
  /// reports it once listening() is true.
  void serve(const std::string& host, int port);
  void stop();
  bool listening() const;
  int bound_port() const;

 private:
  class Server;

  HttpResponse next_task(const HttpRequest& req);
  HttpResponse post_label(const HttpRequest& req);
  HttpResponse agreement(const HttpRequest& req);
  HttpResponse review(std::size_t batch);
  HttpResponse resolve(std::size_t batch, const HttpRequest& req);

  template <typename Fn>
  void write(Fn&& fn);

  std::shared_ptr<const AnnotationStore> state_;
  TaskTexts texts_;
  std::optional<std::filesystem::path> log_path_;
  std::mutex write_mutex_;
  std::unique_ptr<Server> server_;
};

/// Rebuilds a store by replaying a JSONL event log.
AnnotationStore replay_log(AnnotationStore store, const std::filesystem::path& log_path);

}  // namespace covmis
