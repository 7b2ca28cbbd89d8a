// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "parasync/geometry/mesh.hpp"
#include "parasync/net/ws_client.hpp"
#include "parasync/wire/envelope.hpp"

namespace parasync::client {

using Clock = std::chrono::steady_clock;

struct ModelState {
  std::uint64_t revision = 0;
  geometry::Mesh mesh;
  std::vector<std::uint8_t> bytes;
  Clock::time_point received;
};

/// What a viewer would hold for one session.
struct ClientSnapshot {
  std::vector<param::ParamDescriptor> params;
  std::map<std::uint32_t, ModelState> meshes;
  std::optional<Clock::duration> last_latency;
  std::optional<std::uint64_t> self;
  bool host_present = false;
  std::size_t peer_count = 0;
  std::uint64_t frames_received = 0;
  /// Frames that arrived with a revision below one already held (never expected).
  std::uint64_t stale_frames = 0;
  bool connected = false;
};

struct FrameEvent {
  std::uint32_t model_id = 0;
  std::uint64_t revision = 0;
  std::uint32_t vertex_count = 0;
  std::uint32_t triangle_count = 0;
  std::size_t byte_length = 0;
};

class ClientError : public std::runtime_error {
 public:
  enum class Kind { connect, timeout, remote, protocol };
  ClientError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reply to one SET_PARAM. `latency` spans send to arrival of the last frame
/// the APPLIED lists (or to the reply itself for errors).
struct EditOutcome {
  std::uint64_t client_seq = 0;
  std::variant<wire::Applied, wire::Error> reply;
  Clock::duration latency{};
};

/// Blocking client for scripts, tests and benchmarks; network I/O runs on
/// an internal thread.
class ScriptedClient {
 public:
  ScriptedClient(net::RelayUrl url, std::string session, std::string name = "client");
  ~ScriptedClient();
  ScriptedClient(const ScriptedClient&) = delete;
  ScriptedClient& operator=(const ScriptedClient&) = delete;

  /// Called on the I/O thread for every accepted frame. Set before connect().
  void on_frame(std::function<void(const FrameEvent&)> callback);

  /// Returns once the relay has admitted us (cached state already received).
  /// Throws ClientError connect or timeout.
  void connect(std::chrono::milliseconds timeout);
  void close();

  ClientSnapshot snapshot() const;
  /// Waits until `pred` holds for the live state.
  bool wait_for(const std::function<bool(const ClientSnapshot&)>& pred, std::chrono::milliseconds timeout) const;

  /// Sends SET_PARAM without waiting; returns its client_seq.
  std::uint64_t send_edit(const std::string& param_id, const param::ParamValue& value);
  /// Waits for the reply to `client_seq`. Throws ClientError timeout.
  EditOutcome await(std::uint64_t client_seq, std::chrono::milliseconds timeout);
  /// send_edit + await.
  EditOutcome set(const std::string& param_id, const param::ParamValue& value, std::chrono::milliseconds timeout);

  /// Reason the connection ended, if it has.
  std::optional<std::string> closed_reason() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace parasync::client
