#include "optdesign/http_service.hpp"

#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "optdesign/errors.hpp"

namespace optdesign {

namespace {

using nlohmann::json;

HttpResponse error(int status, std::string code, std::string message) {
  return {status, json{{"code", std::move(code)}, {"message", std::move(message)}}.dump()};
}

json render_design(const DesignSpace& space, std::size_t k) {
  const Design& d = space.design(k);
  const auto& attrs = space.schema().attributes();
  json levels = json::array();
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    levels.push_back({{"name", attrs[a].name},
                      {"unit", attrs[a].unit},
                      {"level", attrs[a].levels[static_cast<std::size_t>(d.level_index[a])]}});
  }
  return {{"design", k}, {"price", d.price}, {"attributes", std::move(levels)}};
}

json render_top(const SessionSnapshot& s, std::size_t n) {
  json out = json::array();
  for (std::size_t k : s.top(n)) {
    out.push_back({{"design", k}, {"pi", s.pi[static_cast<Eigen::Index>(k)]}});
  }
  return out;
}

json render_query(const DesignSpace& space, const SessionSnapshot& s) {
  return {{"session_id", s.id},
          {"query_id", s.query_id},
          {"q", s.q},
          {"budget", s.config.queries},
          {"designs", json::array({render_design(space, s.query->first),
                                   render_design(space, s.query->second)})}};
}

json render_state(const DesignSpace& space, const SessionSnapshot& s) {
  std::vector<double> w(s.w_hat.data(), s.w_hat.data() + s.w_hat.size());
  return {{"id", s.id},
          {"status", to_string(s.status)},
          {"strategy", to_string(s.config.strategy)},
          {"q", s.q},
          {"budget", s.config.queries},
          {"query_id", s.query ? json(s.query_id) : json(nullptr)},
          {"entropy", s.entropy_trajectory.back()},
          {"entropy_trajectory", s.entropy_trajectory},
          {"top", render_top(s, 10)},
          {"w_hat", w},
          {"prior_strength", s.prior_strength},
          {"recommendation", render_design(space, s.recommendation)},
          {"created_ms", s.created_ms},
          {"updated_ms", s.updated_ms}};
}

std::vector<std::string_view> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string_view> parts;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    parts.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return parts;
}

SessionConfig parse_session_config(std::string_view body, const SessionConfig& defaults) {
  SessionConfig c = defaults;
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return c;
  const json doc = json::parse(body);
  if (!doc.is_object()) throw ValidationError("session config must be a JSON object");
  if (doc.contains("strategy")) c.strategy = parse_strategy(doc.at("strategy").get<std::string>());
  if (doc.contains("queries")) c.queries = doc.at("queries").get<std::size_t>();
  if (doc.contains("samples")) c.samples = doc.at("samples").get<std::size_t>();
  if (doc.contains("candidates")) c.candidates = doc.at("candidates").get<std::size_t>();
  if (doc.contains("seed") && !doc.at("seed").is_null()) c.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("competitor") && !doc.at("competitor").is_null()) {
    c.competitor = doc.at("competitor").get<std::size_t>();
  }
  c.validate();
  return c;
}

}  // namespace

struct HttpService::Impl {
  std::shared_ptr<SessionManager> sessions;
  ServiceOptions options;
  httplib::Server server;
  bool routes_installed = false;

  HttpResponse route(std::string_view method, std::string_view path, std::string_view body) {
    const auto parts = split_path(path);
    const DesignSpace& space = sessions->space();
    if (method == "GET" && parts.size() == 1 && parts[0] == "healthz") {
      return {200, json{{"status", "ok"}, {"designs", space.size()}}.dump()};
    }
    if (parts.empty() || parts[0] != "sessions") return error(404, "no_route", "unknown route");

    if (parts.size() == 1 && method == "POST") {
      const auto snap = sessions->create(parse_session_config(body, options.defaults));
      json out = render_state(space, *snap);
      out["query"] = snap->query ? render_query(space, *snap) : json(nullptr);
      return {201, out.dump()};
    }
    if (parts.size() != 3) return error(404, "no_route", "unknown route");
    const std::string id(parts[1]);

    if (parts[2] == "query" && method == "GET") {
      const auto snap = sessions->get(id);
      if (!snap->query) {
        json out = json::parse(error(409, "session_complete", "session is complete").body);
        out["completion"] = {{"recommendation", render_design(space, snap->recommendation)},
                             {"top", render_top(*snap, 10)}};
        return {409, out.dump()};
      }
      return {200, render_query(space, *snap).dump()};
    }
    if (parts[2] == "state" && method == "GET") {
      return {200, render_state(space, *sessions->get(id)).dump()};
    }
    if (parts[2] == "responses" && method == "POST") {
      const json doc = json::parse(body);
      if (!doc.is_object() || !doc.contains("query_id") || !doc.contains("chosen")) {
        throw ValidationError("response needs query_id and chosen");
      }
      const auto snap = sessions->respond(id, doc.at("query_id").get<std::string>(),
                                          doc.at("chosen").get<std::size_t>());
      return {200, json{{"q", snap->q},
                        {"status", to_string(snap->status)},
                        {"entropy", snap->entropy_trajectory.back()},
                        {"top", render_top(*snap, 10)},
                        {"next_query_id", snap->query ? json(snap->query_id) : json(nullptr)}}
                       .dump()};
    }
    return error(404, "no_route", "unknown route");
  }

  void install_routes() {
    if (routes_installed) return;
    routes_installed = true;
    if (options.static_dir) server.set_mount_point("/ui", options.static_dir->string());
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const HttpResponse r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
  }

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return route(method, path, body);
    } catch (const SessionNotFound& e) {
      return error(404, "not_found", e.what());
    } catch (const SessionConflict& e) {
      return error(409, "conflict", e.what());
    } catch (const ValidationError& e) {
      return error(400, "invalid_request", e.what());
    } catch (const json::exception& e) {
      return error(400, "bad_json", e.what());
    } catch (const std::exception& e) {
      return error(500, "internal", e.what());
    }
  }
};

HttpService::HttpService(std::shared_ptr<SessionManager> sessions, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->sessions = std::move(sessions);
  impl_->options = std::move(options);
}

HttpService::~HttpService() = default;

HttpResponse HttpService::handle(std::string_view method, std::string_view path,
                                 std::string_view body) {
  return impl_->handle(method, path, body);
}

int HttpService::bind(const std::string& host, int port) {
  impl_->install_routes();
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpService::serve() { return impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace optdesign
