// SPDX-License-Identifier: Apache-2.0
#include "parasync/host/host.hpp"

#include <boost/asio.hpp>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "parasync/host/host_core.hpp"

namespace parasync::host {

namespace asio = boost::asio;
using Clock = std::chrono::steady_clock;

std::chrono::milliseconds Host::backoff(std::chrono::milliseconds base, std::chrono::milliseconds cap,
                                        unsigned attempt) {
  auto delay = base;
  for (unsigned i = 0; i < attempt && delay < cap; ++i) delay *= 2;
  return std::min(delay, cap);
}

struct Host::Impl {
  Impl(param::GraphDefinition graph, HostOptions o)
      : options(std::move(o)), core(std::move(graph)), throttle(options.debounce) {}

  HostOptions options;
  asio::io_context ioc{1};
  asio::executor_work_guard<asio::io_context::executor_type> work = asio::make_work_guard(ioc);
  asio::steady_timer reconnect_timer{ioc};
  asio::steady_timer eval_timer{ioc};
  asio::steady_timer stop_timer{ioc};
  std::thread thread;

  // I/O thread only.
  HostCore core;
  Throttle throttle;
  std::shared_ptr<net::WsClient> client;
  std::uint64_t generation = 0;
  unsigned attempt = 0;
  bool eval_in_flight = false;
  bool eval_timer_armed = false;
  bool stopping = false;

  mutable std::mutex mutex;
  mutable std::condition_variable cv;
  HostStats stats;

  asio::thread_pool worker{1};

  void log(const std::string& line) const {
    if (options.log) options.log(line);
  }

  void set_ready(bool ready) {
    {
      std::lock_guard lock(mutex);
      stats.ready = ready;
      if (ready) ++stats.sessions;
    }
    cv.notify_all();
  }

  bool ready() const {
    std::lock_guard lock(mutex);
    return stats.ready;
  }

  void connect() {
    if (stopping) return;
    const std::uint64_t gen = ++generation;
    net::WsClient::Handlers h;
    h.on_open = [this, gen] {
      if (gen != generation) return;
      client->send_text(wire::encode_envelope(wire::HelloHost{options.session, options.name}));
    };
    h.on_text = [this, gen](std::string text) {
      if (gen == generation) on_text(text);
    };
    h.on_binary = [](std::vector<std::uint8_t>) {};
    h.on_close = [this, gen](const std::string& reason) {
      if (gen == generation) on_close(reason);
    };
    client = net::WsClient::create(ioc, options.relay, std::move(h));
    client->connect();
  }

  void send(const std::vector<Message>& messages) {
    if (!ready()) return;
    for (const auto& m : messages) {
      if (const auto* env = std::get_if<wire::Envelope>(&m)) {
        client->send_text(wire::encode_envelope(*env));
      } else {
        client->send_binary(std::make_shared<const std::vector<std::uint8_t>>(std::get<1>(m)));
      }
    }
  }

  void on_text(const std::string& text) {
    wire::Envelope env;
    try {
      env = wire::decode_envelope(text);
    } catch (const wire::EnvelopeError& e) {
      log(std::string("ignoring malformed message from relay: ") + e.what());
      return;
    }
    if (const auto* peers = std::get_if<wire::Peers>(&env)) {
      if (ready()) return;
      core.resume_revisions(peers->model_revisions);
      attempt = 0;
      set_ready(true);
      log("joined session '" + options.session + "' at " + options.relay.to_string());
      send(core.initial_state());
    } else if (const auto* edit = std::get_if<wire::SetParam>(&env)) {
      if (auto error = core.submit(*edit)) {
        send({wire::Envelope{std::move(*error)}});
      } else {
        schedule();
      }
    } else if (const auto* error = std::get_if<wire::Error>(&env)) {
      log("relay error " + error->code + ": " + error->message);
    } else if (const auto* ping = std::get_if<wire::Ping>(&env)) {
      send({wire::Envelope{wire::Pong{ping->nonce}}});
    }
  }

  void on_close(const std::string& reason) {
    const bool was_ready = ready();
    set_ready(false);
    client.reset();
    if (stopping) {
      ioc.stop();
      return;
    }
    const auto delay = Host::backoff(options.backoff_base, options.backoff_cap, attempt++);
    log((was_ready ? "disconnected (" : "relay unavailable (") + reason + "), retrying in " +
        std::to_string(delay.count()) + " ms");
    reconnect_timer.expires_after(delay);
    reconnect_timer.async_wait([this](boost::system::error_code ec) {
      if (!ec) connect();
    });
  }

  void schedule() {
    if (eval_in_flight || eval_timer_armed || !core.has_pending() || stopping) return;
    const auto now = Clock::now();
    const auto at = throttle.next_start(now);
    if (at <= now) {
      start_eval(now);
      return;
    }
    eval_timer_armed = true;
    eval_timer.expires_at(at);
    eval_timer.async_wait([this](boost::system::error_code ec) {
      eval_timer_armed = false;
      if (!ec) schedule();
    });
  }

  void start_eval(Clock::time_point now) {
    auto batch = std::make_shared<const Batch>(core.take_pending());
    throttle.started(now);
    eval_in_flight = true;
    {
      std::lock_guard lock(mutex);
      ++stats.evaluations;
    }
    asio::post(worker, [this, batch] {
      auto outcome = std::make_shared<EvalOutcome>(evaluate_batch(core.graph(), *batch));
      asio::post(ioc, [this, batch, outcome] {
        eval_in_flight = false;
        send(core.commit(*batch, *outcome));
        schedule();
      });
    });
  }

  void begin_stop() {
    stopping = true;
    reconnect_timer.cancel();
    eval_timer.cancel();
    work.reset();
    if (!client) {
      ioc.stop();
      return;
    }
    client->close();
    stop_timer.expires_after(std::chrono::milliseconds(500));
    stop_timer.async_wait([this](boost::system::error_code) { ioc.stop(); });
  }
};

Host::Host(param::GraphDefinition graph, HostOptions options)
    : impl_(std::make_unique<Impl>(std::move(graph), std::move(options))) {}

Host::~Host() {
  stop();
  impl_->worker.join();
}

void Host::start() {
  impl_->thread = std::thread([this] { run(); });
}

void Host::run() {
  asio::post(impl_->ioc, [impl = impl_.get()] { impl->connect(); });
  impl_->ioc.run();
}

void Host::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] {
    if (!impl->stopping) impl->begin_stop();
  });
  if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id()) impl_->thread.join();
}

HostStats Host::stats() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->stats;
}

bool Host::wait_ready(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mutex);
  return impl_->cv.wait_for(lock, timeout, [&] { return impl_->stats.ready; });
}

}  // namespace parasync::host
