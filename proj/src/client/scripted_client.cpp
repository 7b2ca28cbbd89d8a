// SPDX-License-Identifier: Apache-2.0
#include "parasync/client/scripted_client.hpp"

#include <algorithm>
#include <boost/asio.hpp>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "parasync/wire/mesh_frame.hpp"

namespace parasync::client {

namespace asio = boost::asio;

struct ScriptedClient::Impl {
  net::RelayUrl url;
  std::string session;
  std::string name;
  std::function<void(const FrameEvent&)> frame_callback;

  asio::io_context ioc{1};
  asio::executor_work_guard<asio::io_context::executor_type> work = asio::make_work_guard(ioc);
  std::thread thread;
  std::shared_ptr<net::WsClient> ws;

  mutable std::mutex mutex;
  mutable std::condition_variable cv;
  ClientSnapshot state;
  bool joined = false;
  std::optional<std::string> closed;
  std::uint64_t next_seq = 1;
  std::map<std::uint64_t, Clock::time_point> sent;
  std::map<std::uint64_t, EditOutcome> outcomes;

  void on_text(const std::string& text) {
    wire::Envelope env;
    try {
      env = wire::decode_envelope(text);
    } catch (const wire::EnvelopeError&) {
      return;
    }
    const auto now = Clock::now();
    {
      std::lock_guard lock(mutex);
      if (auto* params = std::get_if<wire::Params>(&env)) {
        state.params = std::move(params->params);
      } else if (auto* applied = std::get_if<wire::Applied>(&env)) {
        on_applied(*applied, now);
      } else if (auto* error = std::get_if<wire::Error>(&env)) {
        if (error->in_reply_to) resolve(*error->in_reply_to, *error, now);
      } else if (auto* peers = std::get_if<wire::Peers>(&env)) {
        state.self = peers->self;
        state.host_present = peers->host;
        state.peer_count = peers->clients.size();
        joined = true;
      } else if (auto* ping = std::get_if<wire::Ping>(&env)) {
        ws->send_text(wire::encode_envelope(wire::Pong{ping->nonce}));
      }
    }
    cv.notify_all();
  }

  void on_applied(const wire::Applied& applied, Clock::time_point now) {
    for (auto& d : state.params) {
      if (d.id == applied.param_id) {
        d.value = applied.value;
        d.revision = applied.param_revision;
      }
    }
    for (const auto& ack : applied.acks) {
      if (!state.self || ack.origin != *state.self) continue;
      Clock::time_point arrived{};
      for (const auto& r : applied.model_revisions) {
        const auto it = state.meshes.find(r.model_id);
        if (it != state.meshes.end() && it->second.revision >= r.revision) arrived = std::max(arrived, it->second.received);
      }
      if (arrived == Clock::time_point{}) arrived = now;
      resolve(ack.client_seq, applied, arrived);
    }
  }

  void resolve(std::uint64_t seq, std::variant<wire::Applied, wire::Error> reply, Clock::time_point at) {
    const auto it = sent.find(seq);
    if (it == sent.end()) return;
    const auto latency = at - it->second;
    sent.erase(it);
    outcomes[seq] = EditOutcome{seq, std::move(reply), latency};
    state.last_latency = latency;
  }

  void on_binary(std::vector<std::uint8_t> bytes) {
    wire::DecodedFrame frame;
    try {
      frame = wire::decode_mesh(bytes);
    } catch (const wire::FrameError&) {
      return;
    }
    const FrameEvent event{frame.model_id, frame.revision, static_cast<std::uint32_t>(frame.mesh.vertex_count()),
                           static_cast<std::uint32_t>(frame.mesh.triangle_count()), bytes.size()};
    {
      std::lock_guard lock(mutex);
      ++state.frames_received;
      auto& slot = state.meshes[frame.model_id];
      if (!slot.bytes.empty() && frame.revision < slot.revision) {
        ++state.stale_frames;
        return;
      }
      slot = ModelState{frame.revision, std::move(frame.mesh), std::move(bytes), Clock::now()};
    }
    cv.notify_all();
    if (frame_callback) frame_callback(event);
  }

  void on_close(const std::string& reason) {
    {
      std::lock_guard lock(mutex);
      closed = reason;
      state.connected = false;
    }
    cv.notify_all();
  }

  void shutdown() {
    if (!thread.joinable()) return;
    if (ws) {
      ws->close();
      std::unique_lock lock(mutex);
      cv.wait_for(lock, std::chrono::seconds(1), [&] { return closed.has_value(); });
    }
    work.reset();
    ioc.stop();
    thread.join();
  }
};

ScriptedClient::ScriptedClient(net::RelayUrl url, std::string session, std::string name)
    : impl_(std::make_shared<Impl>()) {
  impl_->url = std::move(url);
  impl_->session = std::move(session);
  impl_->name = std::move(name);
}

ScriptedClient::~ScriptedClient() { impl_->shutdown(); }

void ScriptedClient::on_frame(std::function<void(const FrameEvent&)> callback) {
  impl_->frame_callback = std::move(callback);
}

void ScriptedClient::connect(std::chrono::milliseconds timeout) {
  Impl* impl = impl_.get();
  if (impl->thread.joinable()) throw ClientError(ClientError::Kind::protocol, "already connected");
  net::WsClient::Handlers h;
  h.on_open = [impl] {
    {
      std::lock_guard lock(impl->mutex);
      impl->state.connected = true;
    }
    impl->ws->send_text(wire::encode_envelope(wire::HelloClient{impl->session, impl->name}));
  };
  h.on_text = [impl](std::string text) { impl->on_text(text); };
  h.on_binary = [impl](std::vector<std::uint8_t> bytes) { impl->on_binary(std::move(bytes)); };
  h.on_close = [impl](const std::string& reason) { impl->on_close(reason); };
  impl->ws = net::WsClient::create(impl->ioc, impl->url, std::move(h));
  impl->ws->connect();
  impl->thread = std::thread([impl] { impl->ioc.run(); });

  std::unique_lock lock(impl->mutex);
  const bool done = impl->cv.wait_for(lock, timeout, [&] { return impl->joined || impl->closed.has_value(); });
  if (impl->joined) return;
  if (!done) {
    throw ClientError(ClientError::Kind::timeout, "no answer from relay at " + impl->url.to_string() + " within " +
                                                      std::to_string(timeout.count()) + " ms");
  }
  throw ClientError(ClientError::Kind::connect, "cannot reach relay at " + impl->url.to_string() + ": " + *impl->closed);
}

void ScriptedClient::close() { impl_->shutdown(); }

ClientSnapshot ScriptedClient::snapshot() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->state;
}

bool ScriptedClient::wait_for(const std::function<bool(const ClientSnapshot&)>& pred,
                              std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mutex);
  return impl_->cv.wait_for(lock, timeout, [&] { return pred(impl_->state); });
}

std::uint64_t ScriptedClient::send_edit(const std::string& param_id, const param::ParamValue& value) {
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(impl_->mutex);
    if (!impl_->ws) throw ClientError(ClientError::Kind::protocol, "not connected");
    seq = impl_->next_seq++;
    impl_->sent[seq] = Clock::now();
  }
  impl_->ws->send_text(wire::encode_envelope(wire::SetParam{param_id, value, seq, std::nullopt, std::nullopt}));
  return seq;
}

EditOutcome ScriptedClient::await(std::uint64_t client_seq, std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  const bool done = impl_->cv.wait_for(lock, timeout, [&] {
    return impl_->outcomes.count(client_seq) != 0 || impl_->closed.has_value();
  });
  const auto it = impl_->outcomes.find(client_seq);
  if (it != impl_->outcomes.end()) {
    EditOutcome out = std::move(it->second);
    impl_->outcomes.erase(it);
    return out;
  }
  if (done) throw ClientError(ClientError::Kind::connect, "connection lost: " + *impl_->closed);
  throw ClientError(ClientError::Kind::timeout, "no reply to edit " + std::to_string(client_seq) + " within " +
                                                    std::to_string(timeout.count()) + " ms");
}

EditOutcome ScriptedClient::set(const std::string& param_id, const param::ParamValue& value,
                                std::chrono::milliseconds timeout) {
  return await(send_edit(param_id, value), timeout);
}

std::optional<std::string> ScriptedClient::closed_reason() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->closed;
}

}  // namespace parasync::client
