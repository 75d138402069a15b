#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "dialect_audit/annotate.hpp"

namespace dialect_audit::annotate {

struct HttpOptions {
  InstructionPages pages = InstructionPages::defaults();
  /// Directory served at `/` (the browser client), if any.
  std::optional<std::filesystem::path> static_dir;
  /// When set, GET /api/export requires this bearer token instead of an
  /// annotator's.
  std::optional<std::string> admin_token;
};

/// JSON API over an AnnotationService. Every /api route needs an
/// `Authorization: Bearer <token>` header.
///
///   GET  /api/instructions              pages plus the caller's acks
///   POST /api/instructions/ack          {"page": "<id>"}
///   GET  /api/tasks/next?annotator=<id> {"task": {...}} or {"task": null}
///   POST /api/judgments                 {"sample_id": "...", "verdict": "valid|invalid|unsure"}
///   GET  /api/progress                  per-dialect pending/assigned/done
///   GET  /api/export                    judgments, one JSON object per line
///
/// Errors come back as {"error": "<kind>", "message": "..."} with 400, 401,
/// 403 (instructions not acknowledged), 404 or 409 (conflict, lease_expired).
class HttpServer {
 public:
  HttpServer(AnnotationService& service, HttpOptions options = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving yet. Port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. bind() must have succeeded.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dialect_audit::annotate
