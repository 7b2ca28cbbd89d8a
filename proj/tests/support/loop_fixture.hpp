// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <thread>

#include "parasync/client/scripted_client.hpp"
#include "parasync/host/host.hpp"
#include "parasync/relay/server.hpp"
#include "test_paths.hpp"

namespace loop {

using namespace std::chrono_literals;

/// Relay on an ephemeral loopback port, served on a background thread.
class RelayThread {
 public:
  explicit RelayThread(parasync::relay::RelayOptions options = {}) {
    if (options.port == 8700) options.port = 0;
    server_ = std::make_unique<parasync::relay::RelayServer>(options);
    server_->start();
    thread_ = std::thread([this] { server_->run(); });
  }
  ~RelayThread() { shutdown(); }

  void shutdown() {
    if (!thread_.joinable()) return;
    server_->stop();
    thread_.join();
  }

  parasync::relay::RelayServer& server() { return *server_; }
  std::uint16_t port() const { return server_->port(); }
  parasync::net::RelayUrl url() const { return {"127.0.0.1", port(), "/ws"}; }

 private:
  std::unique_ptr<parasync::relay::RelayServer> server_;
  std::thread thread_;
};

inline parasync::param::GraphDefinition tower() {
  return parasync::param::load_graph(test_paths::definition("twist_tower.json"));
}

inline std::unique_ptr<parasync::host::Host> start_host(const parasync::net::RelayUrl& url, const std::string& session,
                                                        parasync::param::GraphDefinition graph = tower()) {
  parasync::host::HostOptions options;
  options.relay = url;
  options.session = session;
  auto host = std::make_unique<parasync::host::Host>(std::move(graph), options);
  host->start();
  return host;
}

/// Connects and waits until the client holds PARAMS and every model frame.
inline std::unique_ptr<parasync::client::ScriptedClient> join(const parasync::net::RelayUrl& url,
                                                              const std::string& session, std::size_t models = 2,
                                                              const std::string& name = "client") {
  auto c = std::make_unique<parasync::client::ScriptedClient>(url, session, name);
  c->connect(5s);
  c->wait_for([&](const auto& s) { return !s.params.empty() && s.meshes.size() >= models; }, 5s);
  return c;
}

inline double number(const parasync::client::ClientSnapshot& s, const std::string& id) {
  for (const auto& d : s.params) {
    if (d.id == id) return std::get<double>(d.value);
  }
  return -1;
}

}  // namespace loop
