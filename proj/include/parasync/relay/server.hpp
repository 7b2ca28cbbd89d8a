// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "parasync/relay/router.hpp"

namespace parasync::relay {

struct RelayOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8700;  ///< 0 picks an ephemeral port
  std::size_t frame_cap = 64u << 20;
  std::chrono::milliseconds heartbeat{5000};
  std::chrono::milliseconds dead_after{15000};
  RouterOptions router;
};

/// WebSocket relay: `/ws` carries envelopes (text) and mesh frames (binary),
/// `GET /healthz` reports counts. All connections are served by one I/O thread,
/// which makes every session's handling a single total order.
class RelayServer {
 public:
  explicit RelayServer(RelayOptions options);
  ~RelayServer();
  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  /// Binds and listens. Throws std::system_error when the address is unusable.
  void start();
  std::uint16_t port() const;
  /// Serves until stop(); blocks the calling thread.
  void run();
  /// Thread-safe. Closes the listener and every connection.
  void stop();

  RelayStats stats() const;
  std::vector<RecordedEdit> edit_log(const std::string& session) const;

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace parasync::relay
