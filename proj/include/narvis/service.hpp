#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "narvis/analytics.hpp"
#include "narvis/project_store.hpp"
#include "narvis/svg.hpp"

namespace narvis {

inline constexpr const char* kApiVersion = "1";
inline constexpr const char* kApiVersionHeader = "x-narvis-api";

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;

  Json json() const { return Json::parse(body); }
};

struct ServiceConfig {
  std::filesystem::path data_dir = "narvis-data";
  ProjectStore::Clock clock;
};

/// HTTP status for an error code: 400 schema and input errors, 404 unknown
/// resources, 409 version conflicts, 422 domain rule violations.
int http_status(ErrorCode code);
Json error_body(const Error& e);

/// Transport-independent router over the project store; every endpoint
/// delegates to one core operation.
class Service {
 public:
  explicit Service(ServiceConfig config);

  HttpResponse handle(const HttpRequest& request);

  ProjectStore& store() { return store_; }
  EventStore& events() { return events_; }

 private:
  struct Parsed {
    std::shared_ptr<const SvgDocument> doc;
    std::map<std::string, VisualPrimitive> primitives;
    std::vector<std::string> order;
  };

  HttpResponse route(const HttpRequest& request);
  std::shared_ptr<const Parsed> parsed(const std::string& project_id);

  ProjectStore store_;
  EventStore events_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const Parsed>> cache_;
};

/// HTTP listener over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
void serve_http(Service& service, const std::string& host, int port);

}  // namespace narvis
