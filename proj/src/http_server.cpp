#include <httplib.h>

#include "rv/service.hpp"

namespace rv::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                std::optional<std::size_t> line = std::nullopt, json extra = json::object()) {
  json err{{"code", code}, {"message", message}};
  if (line && *line > 0) err["line"] = *line;
  for (auto& [k, v] : extra.items()) err[k] = v;
  send_json(res, status, json{{"error", err}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw json::type_error::create(302, "request body must be a JSON object", nullptr);
  return body;
}

std::optional<std::size_t> opt_line(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  const auto v = body[key].get<long long>();
  if (v < 1) throw RunError(0, std::string(key) + " must be a positive line number");
  return static_cast<std::size_t>(v);
}

// Runs a handler, mapping library errors onto HTTP statuses.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const SessionNotFound& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const SessionBusy& e) {
    send_error(res, 409, "busy", e.what());
  } catch (const ParseError& e) {
    send_error(res, 422, "parse_error", e.what(), e.line(),
               json{{"column", e.column()}, {"expected", e.expected()}});
  } catch (const RunError& e) {
    send_error(res, 422, "run_error", e.what(), e.line());
  } catch (const IntegrityError& e) {
    send_error(res, 422, "integrity_error", e.what());
  } catch (const StoreError& e) {
    send_error(res, 422, "store_error", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct HttpServer::Impl {
  explicit Impl(fs::path root) : sessions(std::move(root)) {}
  SessionManager sessions;
  httplib::Server server;
};

HttpServer::HttpServer(fs::path root, fs::path static_dir) : impl_(std::make_unique<Impl>(std::move(root))) {
  auto& srv = impl_->server;
  auto& mgr = impl_->sessions;

  if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, json{{"ok", true}}); });

  srv.Post("/sessions", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      LoadedScript loaded;
      if (body.contains("script_path")) {
        fs::path path = body.at("script_path").get<std::string>();
        if (path.is_relative()) path = mgr.root() / path;
        loaded = load_script_file(mgr.store(), path);
      } else if (body.contains("script_text")) {
        const std::string base = body.value("base", std::string("untitled"));
        loaded = load_script_text(mgr.store(), body.at("script_text").get<std::string>(), base, mgr.root());
      } else {
        send_error(res, 400, "bad_request", "body needs script_text or script_path");
        return;
      }
      auto h = mgr.create(std::move(loaded));
      send_json(res, 201,
                json{{"id", h->id},
                     {"base", h->base},
                     {"branch", h->branch.str()},
                     {"lines", lines_json(h->state.script)},
                     {"next_line", h->state.next_line}});
    });
  });

  srv.Get(R"(/sessions/([^/]+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, mgr.describe(req.matches[1])); });
  });

  srv.Post(R"(/sessions/([^/]+)/run)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      RunRequest rr;
      rr.from = opt_line(body, "from");
      rr.through = opt_line(body, "through");
      rr.audit = body.value("audit", false);
      const RunOutcome out = mgr.run(req.matches[1], rr);
      json outputs = json::array();
      for (const auto& e : out.outputs) outputs.push_back(to_json(e));
      json advisories = json::array();
      for (const auto& a : out.advisories) advisories.push_back(to_json(a));
      send_json(res, 200,
                json{{"outputs", outputs},
                     {"advisories", advisories},
                     {"next_line", out.state.next_line},
                     {"rendered", out.rendered}});
    });
  });

  srv.Put(R"(/sessions/([^/]+)/lines/(\d+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const std::size_t line_no = std::stoul(req.matches[2]);
      const auto state = mgr.edit(req.matches[1], line_no, body.at("text").get<std::string>());
      send_json(res, 200, json{{"lines", lines_json(state.script)}, {"next_line", state.next_line}});
    });
  });

  srv.Post(R"(/sessions/([^/]+)/reset)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      mgr.reset(req.matches[1]);
      send_json(res, 200, mgr.describe(req.matches[1]));
    });
  });

  srv.Post(R"(/sessions/([^/]+)/branches)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      const auto rec = mgr.save_branch(req.matches[1], body.value("description", std::string()));
      send_json(res, 201, to_json(rec));
    });
  });

  srv.Get("/branches", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("base")) {
        send_error(res, 400, "bad_request", "query parameter 'base' is required");
        return;
      }
      json out = json::array();
      for (const auto& r : mgr.store().list_branches(req.get_param_value("base"))) out.push_back(to_json(r));
      send_json(res, 200, out);
    });
  });

  srv.Get("/branches/diff", [&mgr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto a = store::parse_branch_filename(req.get_param_value("a") + ".rvl");
      const auto b = store::parse_branch_filename(req.get_param_value("b") + ".rvl");
      if (!a || !b) {
        send_error(res, 400, "bad_request", "parameters 'a' and 'b' must name branches as <base>.<n>");
        return;
      }
      json out = json::array();
      for (const auto& d : mgr.store().diff_branches(*a, *b)) {
        out.push_back(json{{"line", d.line_no()},
                           {"left_line", d.left_line},
                           {"right_line", d.right_line},
                           {"left", d.left ? json(*d.left) : json(nullptr)},
                           {"right", d.right ? json(*d.right) : json(nullptr)}});
      }
      send_json(res, 200, out);
    });
  });
}

HttpServer::~HttpServer() { stop(); }

SessionManager& HttpServer::sessions() { return impl_->sessions; }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace rv::service
