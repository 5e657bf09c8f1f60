#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "optdesign/session.hpp"

namespace optdesign {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  SessionConfig defaults;  // fields missing from POST /sessions fall back here
  std::optional<std::filesystem::path> static_dir;  // mounted at /ui
};

/// JSON API over a SessionManager:
///   POST /sessions
///   GET  /sessions/{id}/query
///   POST /sessions/{id}/responses   {query_id, chosen}
///   GET  /sessions/{id}/state
///   GET  /healthz
/// Errors are {code, message} with status 400, 404 or 409.
class HttpService {
 public:
  HttpService(std::shared_ptr<SessionManager> sessions, ServiceOptions options = {});
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Routes one request without a socket.
  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds `host`; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace optdesign
