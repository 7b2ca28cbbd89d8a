// SPDX-License-Identifier: Apache-2.0
#include "parasync/relay/router.hpp"

#include "parasync/wire/mesh_frame.hpp"

namespace parasync::relay {

Payload make_payload(std::string text) { return std::make_shared<const std::string>(std::move(text)); }

Payload make_payload(const wire::Envelope& envelope) { return make_payload(wire::encode_envelope(envelope)); }

namespace {

void reply(RouteResult& out, ConnId to, const wire::Envelope& env) { out.sends.push_back({to, make_payload(env), false}); }

void error(RouteResult& out, ConnId to, std::string code, std::string message,
           std::optional<std::uint64_t> in_reply_to = std::nullopt) {
  reply(out, to, wire::Error{std::move(code), std::move(message), in_reply_to});
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

Router::Router(RouterOptions options) : options_(options) {}

ConnId Router::open() {
  const ConnId id = next_conn_++;
  connections_.emplace(id, Connection{});
  return id;
}

Router::Session* Router::session_of(const Connection& c) {
  if (c.role == Role::none) return nullptr;
  const auto it = sessions_.find(c.session);
  return it == sessions_.end() ? nullptr : &it->second;
}

RouteResult Router::on_text(ConnId conn, std::string_view text) {
  RouteResult out;
  const auto cit = connections_.find(conn);
  if (cit == connections_.end()) return out;
  Connection& c = cit->second;

  wire::Envelope env;
  try {
    env = wire::decode_envelope(text);
  } catch (const wire::EnvelopeError& e) {
    error(out, conn, "bad_envelope", e.what());
    return out;
  }

  if (const auto* h = std::get_if<wire::HelloHost>(&env)) {
    if (c.role != Role::none) {
      error(out, conn, "already_joined", "connection already joined session '" + c.session + "'");
    } else {
      hello_host(conn, c, *h, out);
    }
    return out;
  }
  if (const auto* h = std::get_if<wire::HelloClient>(&env)) {
    if (c.role != Role::none) {
      error(out, conn, "already_joined", "connection already joined session '" + c.session + "'");
    } else {
      hello_client(conn, c, *h, out);
    }
    return out;
  }
  Session* s = session_of(c);
  if (s == nullptr) {
    error(out, conn, "not_authenticated", "send HELLO_HOST or HELLO_CLIENT first");
    return out;
  }
  if (const auto* p = std::get_if<wire::Ping>(&env)) {
    reply(out, conn, wire::Pong{p->nonce});
    return out;
  }
  if (c.role == Role::host) {
    from_host(conn, *s, std::move(env), out);
  } else {
    from_client(conn, *s, std::move(env), out);
  }
  return out;
}

void Router::hello_host(ConnId conn, Connection& c, const wire::HelloHost& m, RouteResult& out) {
  Session& s = sessions_[m.session];
  if (s.host) {
    error(out, conn, "host_exists", "session '" + m.session + "' already has a live host");
    out.closes.push_back(conn);
    return;
  }
  c.role = Role::host;
  c.session = m.session;
  c.name = m.name;
  s.host = conn;
  s.pending.clear();
  broadcast_peers(s, out);
}

void Router::hello_client(ConnId conn, Connection& c, const wire::HelloClient& m, RouteResult& out) {
  Session& s = sessions_[m.session];
  c.role = Role::client;
  c.session = m.session;
  c.name = m.name;
  s.clients.emplace(conn, m.name);
  if (s.params) reply(out, conn, *s.params);
  for (const auto& [model_id, frame] : s.frames) out.sends.push_back({conn, frame.bytes, true});
  broadcast_peers(s, out);
}

void Router::from_host(ConnId conn, Session& s, wire::Envelope&& env, RouteResult& out) {
  std::visit(
      Overloaded{
          [&](wire::Params& m) {
            s.params = std::move(m);
            s.last_applied.clear();
            to_clients(s, make_payload(*s.params), false, out);
          },
          [&](wire::Applied& m) {
            s.last_applied[m.param_id] = {m.value, m.param_revision};
            if (s.params) {
              for (auto& d : s.params->params) {
                if (d.id == m.param_id) d.value = m.value;
              }
            }
            to_clients(s, make_payload(m), false, out);
          },
          [&](wire::Error& m) {
            if (!m.in_reply_to) {
              to_clients(s, make_payload(m), false, out);
              return;
            }
            const auto it = s.pending.find(*m.in_reply_to);
            if (it == s.pending.end()) return;
            const PendingEdit edit = it->second;
            s.pending.erase(it);
            if (s.clients.count(edit.origin) == 0) return;
            m.in_reply_to = edit.client_seq;
            reply(out, edit.origin, m);
          },
          [&](wire::Pong&) {},
          [&](auto& m) {
            error(out, conn, "bad_role", std::string(wire::type_name(wire::Envelope{m})) + " is not accepted from a host");
          },
      },
      env);
}

void Router::from_client(ConnId conn, Session& s, wire::Envelope&& env, RouteResult& out) {
  std::visit(Overloaded{
                 [&](wire::SetParam& m) {
                   if (!s.host) {
                     error(out, conn, "no_host", "session has no host", m.client_seq);
                     return;
                   }
                   const std::uint64_t seq = next_relay_seq_++;
                   m.relay_seq = seq;
                   m.origin = conn;
                   s.edits.push_back({seq, conn, m.client_seq, m.param_id, m.value});
                   if (s.edits.size() > options_.edit_log_limit) s.edits.pop_front();
                   s.pending[seq] = {conn, m.client_seq};
                   if (s.pending.size() > options_.pending_limit) s.pending.erase(s.pending.begin());
                   reply(out, *s.host, m);
                 },
                 [&](wire::Pong&) {},
                 [&](auto& m) {
                   error(out, conn, "bad_role",
                         std::string(wire::type_name(wire::Envelope{m})) + " is not accepted from a client");
                 },
             },
             env);
}

RouteResult Router::on_binary(ConnId conn, std::span<const std::uint8_t> bytes) {
  RouteResult out;
  const auto cit = connections_.find(conn);
  if (cit == connections_.end()) return out;
  Session* s = session_of(cit->second);
  if (s == nullptr) {
    error(out, conn, "not_authenticated", "send HELLO_HOST or HELLO_CLIENT first");
    return out;
  }
  if (cit->second.role != Role::host) {
    error(out, conn, "bad_role", "mesh frames are accepted from hosts only");
    return out;
  }
  wire::FrameHeader header;
  try {
    header = wire::decode_header(bytes);
    wire::decode_mesh(bytes);
  } catch (const wire::FrameError& e) {
    error(out, conn, "invalid_frame", std::string(wire::to_string(e.code())) + ": " + e.what());
    return out;
  }
  CachedFrame& slot = s->frames[header.model_id];
  if (slot.bytes && header.revision < slot.revision) {
    error(out, conn, "stale_revision",
          "model " + std::to_string(header.model_id) + " revision " + std::to_string(header.revision) +
              " is below cached revision " + std::to_string(slot.revision));
    return out;
  }
  slot.revision = header.revision;
  slot.bytes = make_payload(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  to_clients(*s, slot.bytes, true, out);
  return out;
}

RouteResult Router::on_close(ConnId conn) {
  RouteResult out;
  const auto cit = connections_.find(conn);
  if (cit == connections_.end()) return out;
  const Connection c = cit->second;
  connections_.erase(cit);
  if (c.role == Role::none) return out;
  const auto sit = sessions_.find(c.session);
  if (sit == sessions_.end()) return out;
  Session& s = sit->second;
  if (c.role == Role::host) {
    if (s.host == conn) {
      s.host.reset();
      s.pending.clear();
    }
  } else {
    s.clients.erase(conn);
  }
  if (!s.host && s.clients.empty()) {
    sessions_.erase(sit);
    return out;
  }
  broadcast_peers(s, out);
  return out;
}

void Router::broadcast_peers(Session& s, RouteResult& out) const {
  wire::Peers peers;
  for (const auto& [id, name] : s.clients) peers.clients.push_back({id, name});
  peers.host = s.host.has_value();
  for (const auto& [id, name] : s.clients) {
    peers.self = id;
    reply(out, id, peers);
  }
  if (s.host) {
    peers.self = *s.host;
    for (const auto& [model_id, frame] : s.frames) peers.model_revisions.push_back({model_id, frame.revision});
    reply(out, *s.host, peers);
  }
}

void Router::to_clients(const Session& s, const Payload& payload, bool binary, RouteResult& out) const {
  for (const auto& [id, name] : s.clients) out.sends.push_back({id, payload, binary});
}

RelayStats Router::stats() const {
  RelayStats st;
  st.connections = connections_.size();
  st.sessions = sessions_.size();
  for (const auto& [id, s] : sessions_) {
    st.hosts += s.host ? 1 : 0;
    st.clients += s.clients.size();
  }
  return st;
}

std::vector<RecordedEdit> Router::edit_log(const std::string& session) const {
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) return {};
  return {it->second.edits.begin(), it->second.edits.end()};
}

std::map<std::uint32_t, Payload> Router::cached_frames(const std::string& session) const {
  std::map<std::uint32_t, Payload> out;
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) return out;
  for (const auto& [id, f] : it->second.frames) out.emplace(id, f.bytes);
  return out;
}

std::optional<wire::Params> Router::cached_params(const std::string& session) const {
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.params;
}

}  // namespace parasync::relay
