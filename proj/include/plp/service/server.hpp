#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "plp/service/workspace.hpp"

namespace plp::service {

// Environment variables that override the config file.
inline constexpr const char* kEnvDataDir = "PLP_DATA_DIR";
inline constexpr const char* kEnvListenAddr = "PLP_LISTEN_ADDR";
inline constexpr const char* kEnvFixturePath = "PLP_FIXTURE_PATH";

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Empty: nothing. "dipyrone": the built-in worked example, loaded into an
  // empty data directory. Anything else: an ontology record file loaded
  // when the ontology is still empty.
  std::string fixture_path;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// "host:port". ConfigInvalid on anything else.
void parse_listen_addr(const std::string& addr, ServiceConfig& out);
// Keys: data_dir, listen_addr, fixture_path. Unknown keys are rejected.
ServiceConfig config_from_json(const nlohmann::json& j, const EnvLookup& env = process_env());
ServiceConfig load_config(const std::optional<std::filesystem::path>& file,
                          const EnvLookup& env = process_env());

class Server {
 public:
  explicit Server(ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds the listen address and returns the port. AddressInUse on failure.
  int bind();
  // Serves until stop(). Requires bind().
  void run();
  void stop();
  // Blocks until the listener accepts connections.
  void wait_until_ready() const;

  Workspace& workspace();
  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace plp::service
