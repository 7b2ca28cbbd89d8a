// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "parasync/net/ws_client.hpp"
#include "parasync/param/graph.hpp"

namespace parasync::host {

struct HostOptions {
  net::RelayUrl relay;
  std::string session;
  std::string name = "host";
  std::chrono::milliseconds debounce{33};
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{30000};
  /// Status lines (connects, rejections, disconnects). May be empty.
  std::function<void(const std::string&)> log;
};

struct HostStats {
  std::uint64_t evaluations = 0;  ///< excluding the startup evaluation
  std::uint64_t sessions = 0;     ///< completed handshakes
  bool ready = false;
};

/// Connects a graph to a relay session as its host: announces, streams
/// frames, applies edits under the debounce interval, and reconnects with
/// exponential backoff. Message handling runs on one I/O thread; evaluation
/// runs on a dedicated worker, at most one at a time.
class Host {
 public:
  /// Throws param::GraphError when the graph does not evaluate.
  Host(param::GraphDefinition graph, HostOptions options);
  ~Host();
  Host(const Host&) = delete;
  Host& operator=(const Host&) = delete;

  /// Runs on a background thread.
  void start();
  /// Runs on the calling thread until stop().
  void run();
  /// Thread-safe; joins the background thread if start() was used.
  void stop();

  HostStats stats() const;
  /// Blocks until a relay handshake has completed, or the timeout passes.
  bool wait_ready(std::chrono::milliseconds timeout) const;

  /// Delay before reconnect attempt `attempt` (0-based): base·2^attempt, capped.
  static std::chrono::milliseconds backoff(std::chrono::milliseconds base, std::chrono::milliseconds cap,
                                           unsigned attempt);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace parasync::host
