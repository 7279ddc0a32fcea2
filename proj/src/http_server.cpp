#include "anchorweave/http_server.hpp"

#include <charconv>

#include "httplib.h"

#include "anchorweave/error.hpp"

namespace anchorweave::service {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::capacity: return 429;
    case ErrorCode::integrity:
    case ErrorCode::io: return 500;
    default: return 400;
  }
}

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"error", code}, {"message", message}}, status);
}

void send_png(httplib::Response& res, const std::vector<std::uint8_t>& bytes) {
  res.status = 200;
  res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::not_found, std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("request body is not JSON: ") + e.what());
  }
}

ActionBatch parse_actions(const Json& body) {
  if (!body.is_object()) throw Error(ErrorCode::validation, "request body must be a JSON object");
  ActionBatch batch;
  if (body.contains("script")) {
    if (!body["script"].is_string()) throw Error(ErrorCode::validation, "script must be a string");
    for (const ActionBatch& b : actions::parse_script(body["script"].get<std::string>())) {
      batch.insert(batch.end(), b.begin(), b.end());
    }
  }
  if (body.contains("actions")) {
    if (!body["actions"].is_array()) throw Error(ErrorCode::validation, "actions must be an array");
    for (const Json& a : body["actions"]) {
      if (!a.is_object() || !a.contains("action") || !a["action"].is_string()) {
        throw Error(ErrorCode::validation, "each action needs an 'action' name");
      }
      ActionStep step;
      step.action = action_from_string(a["action"].get<std::string>());
      if (a.contains("repeat")) {
        if (!a["repeat"].is_number_integer() || a["repeat"].get<int>() < 1) {
          throw Error(ErrorCode::validation, "repeat must be an integer >= 1");
        }
        step.repeat = a["repeat"].get<int>();
      }
      batch.push_back(step);
    }
  }
  return batch;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

HttpServer::HttpServer(SessionManager& manager) : manager_(manager), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  SessionManager& m = manager_;

  srv.Post("/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
             const std::string id = m.create(CreateRequest::from_json(parse_body(req)));
             send_json(res, m.state(id), 201);
           }));
  srv.Get("/sessions", guarded([&m](const httplib::Request&, httplib::Response& res) { send_json(res, m.list()); }));
  srv.Get(R"(/sessions/([^/]+)/state)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
            send_json(res, m.state(req.matches[1]));
          }));
  srv.Post(R"(/sessions/([^/]+)/step)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
             send_json(res, m.step(req.matches[1], parse_actions(parse_body(req))));
           }));
  srv.Get(R"(/sessions/([^/]+)/frames/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
            const bool holes = req.get_param_value("kind") == "holes";
            send_png(res, m.frame_png(req.matches[1], parse_int(req.matches[2], "frame index"), holes));
          }));
  srv.Get(R"(/sessions/([^/]+)/anchors/([^/]+)/([^/]+))",
          guarded([&m](const httplib::Request& req, httplib::Response& res) {
            const bool vis = req.get_param_value("kind") == "visibility";
            send_png(res, m.anchor_png(req.matches[1], parse_int(req.matches[2], "frame index"),
                                       static_cast<int>(parse_int(req.matches[3], "slot")), vis));
          }));
  srv.Get(R"(/sessions/([^/]+)/coverage/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
            int offset = 0;
            if (req.has_param("frame")) offset = static_cast<int>(parse_int(req.get_param_value("frame"), "frame"));
            send_png(res, m.coverage_png(req.matches[1], parse_int(req.matches[2], "chunk"), offset));
          }));
  srv.Get(R"(/sessions/([^/]+)/history)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
            res.set_content(m.history(req.matches[1]), "text/plain");
          }));
  srv.Delete(R"(/sessions/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
               m.remove(req.matches[1]);
               res.status = 204;
             }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace anchorweave::service
