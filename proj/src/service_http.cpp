#include <algorithm>
#include <cctype>

#include "httplib.h"
#include "narvis/error.hpp"
#include "narvis/service.hpp"

namespace narvis {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void dispatch(Service& service, const httplib::Request& in, httplib::Response& out) {
  HttpRequest req;
  req.method = in.method;
  req.path = in.path;
  req.body = in.body;
  for (const auto& [k, v] : in.params) req.query.emplace(k, v);
  for (const auto& [k, v] : in.headers) req.headers.emplace(lower(k), v);
  HttpResponse res = service.handle(req);
  out.status = res.status;
  for (const auto& [k, v] : res.headers) out.set_header(k, v);
  if (!res.content_type.empty()) out.set_content(res.body, res.content_type);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto handler = [&service](const httplib::Request& in, httplib::Response& out) { dispatch(service, in, out); };
  const std::string any = R"(/.*)";
  impl_->server.Get(any, handler);
  impl_->server.Post(any, handler);
  impl_->server.Put(any, handler);
  impl_->server.Patch(any, handler);
  impl_->server.Delete(any, handler);
  impl_->server.Options(any, handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  bool ok = port == 0 ? (port = impl_->server.bind_to_any_port(host)) > 0 : impl_->server.bind_to_port(host, port);
  if (!ok) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() {
  if (!impl_->server.listen_after_bind()) throw Error(ErrorCode::Io, "HTTP listener stopped unexpectedly");
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void serve_http(Service& service, const std::string& host, int port) {
  HttpServer server(service);
  server.bind(host, port);
  server.run();
}

}  // namespace narvis
