// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parasync/wire/envelope.hpp"

namespace parasync::relay {

using ConnId = std::uint64_t;
using Payload = std::shared_ptr<const std::string>;

/// One message for one connection. Fan-outs share a single payload.
struct Outbound {
  ConnId to = 0;
  Payload payload;
  bool binary = false;
};

struct RouteResult {
  std::vector<Outbound> sends;
  std::vector<ConnId> closes;
};

/// A client edit in the session's total order.
struct RecordedEdit {
  std::uint64_t relay_seq = 0;
  ConnId origin = 0;
  std::uint64_t client_seq = 0;
  std::string param_id;
  param::ParamValue value;
};

struct RelayStats {
  std::size_t connections = 0;
  std::size_t sessions = 0;
  std::size_t hosts = 0;
  std::size_t clients = 0;
};

struct RouterOptions {
  std::size_t edit_log_limit = 1 << 16;
  std::size_t pending_limit = 1 << 16;
};

/// Relay routing state machine, free of I/O. Every call is one step of the
/// total order; the caller delivers the returned sends in order.
class Router {
 public:
  explicit Router(RouterOptions options = {});

  ConnId open();
  RouteResult on_text(ConnId conn, std::string_view text);
  RouteResult on_binary(ConnId conn, std::span<const std::uint8_t> bytes);
  RouteResult on_close(ConnId conn);

  RelayStats stats() const;
  std::vector<RecordedEdit> edit_log(const std::string& session) const;
  /// Cached frame bytes per model_id.
  std::map<std::uint32_t, Payload> cached_frames(const std::string& session) const;
  std::optional<wire::Params> cached_params(const std::string& session) const;

 private:
  enum class Role { none, host, client };

  struct Connection {
    Role role = Role::none;
    std::string session;
    std::string name;
  };

  struct CachedFrame {
    std::uint64_t revision = 0;
    Payload bytes;
  };

  struct PendingEdit {
    ConnId origin = 0;
    std::uint64_t client_seq = 0;
  };

  struct Session {
    std::optional<ConnId> host;
    std::map<ConnId, std::string> clients;
    std::optional<wire::Params> params;
    std::map<std::uint32_t, CachedFrame> frames;
    std::map<std::string, std::pair<param::ParamValue, std::uint64_t>> last_applied;
    std::map<std::uint64_t, PendingEdit> pending;
    std::deque<RecordedEdit> edits;
  };

  void hello_host(ConnId conn, Connection& c, const wire::HelloHost& m, RouteResult& out);
  void hello_client(ConnId conn, Connection& c, const wire::HelloClient& m, RouteResult& out);
  void from_host(ConnId conn, Session& s, wire::Envelope&& env, RouteResult& out);
  void from_client(ConnId conn, Session& s, wire::Envelope&& env, RouteResult& out);
  void broadcast_peers(Session& s, RouteResult& out) const;
  void to_clients(const Session& s, const Payload& payload, bool binary, RouteResult& out) const;
  Session* session_of(const Connection& c);

  RouterOptions options_;
  ConnId next_conn_ = 1;
  std::uint64_t next_relay_seq_ = 1;
  std::map<ConnId, Connection> connections_;
  std::map<std::string, Session> sessions_;
};

Payload make_payload(std::string text);
Payload make_payload(const wire::Envelope& envelope);

}  // namespace parasync::relay
