#include "plp/service/server.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>

#include <httplib.h>

#include "plp/common/error.hpp"
#include "plp/service/dipyrone_fixture.hpp"
#include "plp/service/operations.hpp"

namespace plp::service {

using nlohmann::json;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void parse_listen_addr(const std::string& addr, ServiceConfig& out) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw Error(ErrorCode::ConfigInvalid, "listen_addr must be host:port", json{{"listen_addr", addr}});
  }
  auto port_text = addr.substr(colon + 1);
  if (port_text.find_first_not_of("0123456789") != std::string::npos || port_text.size() > 5) {
    throw Error(ErrorCode::ConfigInvalid, "listen_addr port is not a number",
                json{{"listen_addr", addr}});
  }
  int port = std::stoi(port_text);
  if (port > 65535) {
    throw Error(ErrorCode::ConfigInvalid, "listen_addr port out of range", json{{"listen_addr", addr}});
  }
  out.host = addr.substr(0, colon);
  out.port = port;
}

ServiceConfig config_from_json(const json& j, const EnvLookup& env) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be an object");
  ServiceConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key != "data_dir" && key != "listen_addr" && key != "fixture_path") {
      throw Error(ErrorCode::ConfigInvalid, "unknown config key " + key, json{{"key", key}});
    }
    if (!value.is_string()) {
      throw Error(ErrorCode::ConfigInvalid, key + " must be a string", json{{"key", key}});
    }
  }
  if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("listen_addr")) parse_listen_addr(j.at("listen_addr").get<std::string>(), c);
  if (j.contains("fixture_path")) c.fixture_path = j.at("fixture_path").get<std::string>();

  if (auto v = env(kEnvDataDir)) c.data_dir = *v;
  if (auto v = env(kEnvListenAddr)) parse_listen_addr(*v, c);
  if (auto v = env(kEnvFixturePath)) c.fixture_path = *v;

  if (c.data_dir.empty()) throw Error(ErrorCode::ConfigInvalid, "data_dir is required");
  std::error_code ec;
  std::filesystem::create_directories(c.data_dir, ec);
  if (ec || !std::filesystem::is_directory(c.data_dir)) {
    throw Error(ErrorCode::ConfigInvalid, "data_dir is not a usable directory",
                json{{"data_dir", c.data_dir.string()}});
  }
  return c;
}

ServiceConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  json j = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) {
      throw Error(ErrorCode::ConfigInvalid, "cannot read config " + file->string());
    }
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::ConfigInvalid, "config is not valid JSON", json{{"path", file->string()}});
    }
  }
  return config_from_json(j, env);
}

namespace {

void apply_fixture(const ServiceConfig& c) {
  if (c.fixture_path.empty()) return;
  if (c.fixture_path == "dipyrone") {
    bool fresh = Workspace(c.data_dir).empty();
    if (fresh) load_dipyrone_fixture(c.data_dir);
    return;
  }
  if (!std::filesystem::is_regular_file(c.fixture_path)) {
    throw Error(ErrorCode::ConfigInvalid, "fixture_path does not exist",
                json{{"fixture_path", c.fixture_path}});
  }
}

}  // namespace

struct Server::Impl {
  ServiceConfig config;
  Workspace ws;
  httplib::Server http;
  std::mutex idem_mutex;
  std::map<std::string, std::pair<int, std::string>> idem;

  explicit Impl(ServiceConfig c)
      : config((apply_fixture(c), std::move(c))), ws(config.data_dir) {
    if (!config.fixture_path.empty() && config.fixture_path != "dipyrone" &&
        ws.ontology().entity_count() == 0) {
      ws.ontology().load_file(config.fixture_path, &ws.packs());
    }
    // httplib defaults to SO_REUSEPORT, which lets a second server share a
    // port silently. Plain SO_REUSEADDR still allows fast restarts.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  static void send(httplib::Response& res, int status, const std::string& body) {
    res.status = status;
    res.set_content(body, "application/json");
  }

  // Runs a handler, mapping module errors onto the envelope. Mutations with
  // an Idempotency-Key replay the first response.
  template <typename F>
  void guarded(const httplib::Request& req, httplib::Response& res, F&& fn, bool mutation = false) {
    std::string key;
    if (mutation && req.has_header("Idempotency-Key")) {
      key = req.method + " " + req.path + " " + req.get_header_value("Idempotency-Key");
      std::lock_guard lock(idem_mutex);
      if (auto it = idem.find(key); it != idem.end()) {
        send(res, it->second.first, it->second.second);
        res.set_header("Idempotent-Replay", "true");
        return;
      }
    }
    int status = 200;
    std::string body;
    try {
      body = fn();
    } catch (const Error& e) {
      status = error_http_status(e.code());
      body = e.envelope().dump();
    } catch (const json::exception& e) {
      status = 422;
      body = Error(ErrorCode::InvalidArgument, e.what()).envelope().dump();
    } catch (const std::exception& e) {
      status = 500;
      body = Error(ErrorCode::IoFailure, e.what()).envelope().dump();
    }
    if (!key.empty()) {
      std::lock_guard lock(idem_mutex);
      idem.emplace(key, std::make_pair(status, body));
    }
    send(res, status, body);
  }

  void routes() {
    using Req = httplib::Request;
    using Res = httplib::Response;

    http.Post("/documents", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::ingest(ws, ops::parse_body(q.body)); }, true);
    });
    http.Get(R"(/documents/([^/]+)/versions)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::versions(ws, q.matches[1]); });
    });
    http.Post(R"(/documents/([^/]+)/verify)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::verify(ws, q.matches[1]); }, true);
    });

    http.Post("/packs", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::create_pack(ws, ops::parse_body(q.body)); }, true);
    });
    http.Get("/packs", [this](const Req& q, Res& r) {
      guarded(q, r, [&] {
        std::optional<std::string> state;
        if (q.has_param("state")) state = q.get_param_value("state");
        return ops::list_packs(ws, state);
      });
    });
    http.Get(R"(/packs/([^/]+))", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::show_pack(ws, q.matches[1]); });
    });
    http.Post(R"(/packs/([^/]+)/submit)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::submit(ws, q.matches[1]); }, true);
    });
    http.Post(R"(/packs/([^/]+)/curate)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] {
        auto body = ops::parse_body(q.body);
        return ops::curate(ws, q.matches[1], body.value("verdict", ""),
                           q.get_header_value("X-Curator"), body.value("justification", ""));
      }, true);
    });
    http.Post(R"(/packs/([^/]+)/derive)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::derive(ws, q.matches[1], ops::parse_body(q.body)); }, true);
    });
    http.Get(R"(/packs/([^/]+)/validate)", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::validate(ws, q.matches[1]); });
    });

    http.Post("/links", [this](const Req& q, Res& r) {
      guarded(q, r, [&] {
        auto body = ops::parse_body(q.body);
        return ops::link(ws, body.value("pack_id", ""), body.value("entity_id", ""));
      }, true);
    });
    http.Get(R"(/entities/([^/]+)/views/([^/]+))", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::refract(ws, q.matches[1], q.matches[2]); });
    });
    http.Get(R"(/graphs/([^/]+)/trace/(.+))", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::trace(ws, q.matches[1], q.matches[2]); });
    });
    http.Get("/metrics", [this](const Req& q, Res& r) {
      guarded(q, r, [&] { return ops::metrics(ws); });
    });

    http.set_error_handler([](const Req& q, Res& r) {
      if (!r.body.empty()) return;
      auto code = r.status == 404 ? "not_found" : "http_error";
      r.set_content(json{{"code", code},
                         {"message", "no route for " + q.method + " " + q.path},
                         {"detail", nullptr}}
                        .dump(),
                    "application/json");
    });
  }
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Server::~Server() { stop(); }

int Server::bind() {
  auto& c = impl_->config;
  int port = c.port == 0 ? impl_->http.bind_to_any_port(c.host)
                         : (impl_->http.bind_to_port(c.host, c.port) ? c.port : -1);
  if (port < 0) {
    throw Error(ErrorCode::AddressInUse, "cannot listen on " + c.host + ":" + std::to_string(c.port),
                json{{"host", c.host}, {"port", c.port}});
  }
  return port;
}

void Server::run() { impl_->http.listen_after_bind(); }
void Server::stop() {
  if (impl_) impl_->http.stop();
}
void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }
Workspace& Server::workspace() { return impl_->ws; }
const ServiceConfig& Server::config() const { return impl_->config; }

}  // namespace plp::service
