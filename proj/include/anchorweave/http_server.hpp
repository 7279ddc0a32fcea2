#pragma once

#include <memory>
#include <string>

#include "anchorweave/error.hpp"
#include "anchorweave/service.hpp"

namespace httplib {
class Server;
}

namespace anchorweave::service {

/// HTTP front end over a SessionManager. Routes:
///   POST   /sessions
///   GET    /sessions
///   GET    /sessions/{id}/state
///   POST   /sessions/{id}/step
///   GET    /sessions/{id}/frames/{i}[?kind=holes]
///   GET    /sessions/{id}/anchors/{i}/{slot}[?kind=visibility]
///   GET    /sessions/{id}/coverage/{chunk}[?frame=offset]
///   GET    /sessions/{id}/history
///   DELETE /sessions/{id}
class HttpServer {
 public:
  explicit HttpServer(SessionManager& manager);
  ~HttpServer();

  /// Binds to `port` (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  SessionManager& manager_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code) noexcept;

}  // namespace anchorweave::service
