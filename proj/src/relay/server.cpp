// SPDX-License-Identifier: Apache-2.0
#include "parasync/relay/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <json.hpp>
#include <mutex>

namespace parasync::relay {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

class WsConnection;

}  // namespace

struct RelayServer::Impl {
  explicit Impl(RelayOptions o) : options(std::move(o)), router(options.router) {}

  RelayOptions options;
  asio::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  asio::steady_timer heartbeat{ioc};
  std::uint16_t bound_port = 0;

  mutable std::mutex mutex;
  Router router;
  std::map<ConnId, std::shared_ptr<WsConnection>> connections;

  void accept();
  void arm_heartbeat();
  void dispatch(RouteResult&& result);

  ConnId attach(const std::shared_ptr<WsConnection>& conn);
  void on_text(ConnId id, std::string_view text);
  void on_binary(ConnId id, std::span<const std::uint8_t> bytes);
  void detach(ConnId id);
  std::string health() const;
};

namespace {

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, RelayServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

  void start(http::request<http::string_body> req) {
    websocket::stream_base::timeout t{};
    t.handshake_timeout = std::chrono::seconds(10);
    t.idle_timeout = websocket::stream_base::none();
    t.keep_alive_pings = false;
    ws_.set_option(t);
    ws_.read_message_max(server_.options.frame_cap);
    ws_.auto_fragment(false);
    ws_.control_callback([this](websocket::frame_type, beast::string_view) { last_seen_ = Clock::now(); });
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->last_seen_ = Clock::now();
      self->id_ = self->server_.attach(self);
      self->read();
    });
  }

  void send(Payload payload, bool binary) { enqueue({Kind::message, std::move(payload), binary}); }
  void ping() { enqueue({Kind::ping, nullptr, false}); }
  void close() { enqueue({Kind::close, nullptr, false}); }

  Clock::time_point last_seen() const { return last_seen_; }

  void finish() {
    if (finished_) return;
    finished_ = true;
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).socket().close(ignored);
    if (id_ != 0) server_.detach(id_);
  }

 private:
  enum class Kind { message, ping, close };
  struct Item {
    Kind kind;
    Payload payload;
    bool binary;
  };

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      self->last_seen_ = Clock::now();
      const auto data = self->buffer_.cdata();
      if (self->ws_.got_text()) {
        self->server_.on_text(self->id_, std::string_view(static_cast<const char*>(data.data()), data.size()));
      } else {
        self->server_.on_binary(self->id_, {static_cast<const std::uint8_t*>(data.data()), data.size()});
      }
      self->buffer_.consume(self->buffer_.size());
      if (!self->finished_) self->read();
    });
  }

  void enqueue(Item item) {
    if (finished_ || closing_) return;
    queue_.push_back(std::move(item));
    if (!writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    Item& item = queue_.front();
    auto done = [self = shared_from_this()](beast::error_code ec, std::size_t = 0) { self->on_write(ec); };
    switch (item.kind) {
      case Kind::message:
        ws_.binary(item.binary);
        ws_.async_write(asio::buffer(*item.payload), done);
        break;
      case Kind::ping:
        ws_.async_ping({}, [done](beast::error_code ec) { done(ec); });
        break;
      case Kind::close:
        closing_ = true;
        ws_.async_close(websocket::close_code::policy_error, [done](beast::error_code ec) { done(ec); });
        break;
    }
  }

  void on_write(beast::error_code ec) {
    if (ec) {
      finish();
      return;
    }
    queue_.pop_front();
    if (queue_.empty()) {
      writing_ = false;
    } else {
      write_next();
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  RelayServer::Impl& server_;
  beast::flat_buffer buffer_;
  std::deque<Item> queue_;
  ConnId id_ = 0;
  bool writing_ = false;
  bool closing_ = false;
  bool finished_ = false;
  Clock::time_point last_seen_ = Clock::now();
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, RelayServer::Impl& server) : stream_(std::move(socket)), server_(server) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(10));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->handle();
    });
  }

 private:
  void handle() {
    const std::string target(req_.target());
    if (websocket::is_upgrade(req_) && target == "/ws") {
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), server_)->start(std::move(req_));
      return;
    }
    res_.version(req_.version());
    res_.keep_alive(false);
    res_.set(http::field::server, "parasync-relay");
    if (req_.method() == http::verb::get && target == "/healthz") {
      res_.result(http::status::ok);
      res_.set(http::field::content_type, "application/json");
      res_.body() = server_.health();
    } else {
      res_.result(http::status::not_found);
      res_.set(http::field::content_type, "text/plain");
      res_.body() = "not found\n";
    }
    res_.prepare_payload();
    http::async_write(stream_, res_, [self = shared_from_this()](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  RelayServer::Impl& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  http::response<http::string_body> res_;
};

}  // namespace

void RelayServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec == asio::error::operation_aborted || !acceptor.is_open()) return;
    if (!ec) {
      beast::error_code ignored;
      socket.set_option(tcp::no_delay(true), ignored);
      std::make_shared<HttpSession>(std::move(socket), *this)->start();
    }
    accept();
  });
}

void RelayServer::Impl::arm_heartbeat() {
  heartbeat.expires_after(options.heartbeat);
  heartbeat.async_wait([this](beast::error_code ec) {
    if (ec) return;
    const auto now = Clock::now();
    std::vector<std::shared_ptr<WsConnection>> conns;
    {
      std::lock_guard lock(mutex);
      for (const auto& [id, c] : connections) conns.push_back(c);
    }
    for (const auto& c : conns) {
      if (now - c->last_seen() > options.dead_after) {
        c->finish();
      } else {
        c->ping();
      }
    }
    arm_heartbeat();
  });
}

ConnId RelayServer::Impl::attach(const std::shared_ptr<WsConnection>& conn) {
  std::lock_guard lock(mutex);
  const ConnId id = router.open();
  connections.emplace(id, conn);
  return id;
}

void RelayServer::Impl::on_text(ConnId id, std::string_view text) {
  RouteResult result;
  {
    std::lock_guard lock(mutex);
    result = router.on_text(id, text);
  }
  dispatch(std::move(result));
}

void RelayServer::Impl::on_binary(ConnId id, std::span<const std::uint8_t> bytes) {
  RouteResult result;
  {
    std::lock_guard lock(mutex);
    result = router.on_binary(id, bytes);
  }
  dispatch(std::move(result));
}

void RelayServer::Impl::detach(ConnId id) {
  RouteResult result;
  {
    std::lock_guard lock(mutex);
    connections.erase(id);
    result = router.on_close(id);
  }
  dispatch(std::move(result));
}

void RelayServer::Impl::dispatch(RouteResult&& result) {
  std::vector<std::pair<std::shared_ptr<WsConnection>, Outbound>> sends;
  std::vector<std::shared_ptr<WsConnection>> closes;
  {
    std::lock_guard lock(mutex);
    for (auto& s : result.sends) {
      const auto it = connections.find(s.to);
      if (it != connections.end()) sends.emplace_back(it->second, std::move(s));
    }
    for (ConnId id : result.closes) {
      const auto it = connections.find(id);
      if (it != connections.end()) closes.push_back(it->second);
    }
  }
  for (auto& [conn, s] : sends) conn->send(std::move(s.payload), s.binary);
  for (auto& conn : closes) conn->close();
}

std::string RelayServer::Impl::health() const {
  std::lock_guard lock(mutex);
  const RelayStats st = router.stats();
  nlohmann::json j{{"status", "ok"},
                   {"connections", st.connections},
                   {"sessions", st.sessions},
                   {"hosts", st.hosts},
                   {"clients", st.clients}};
  return j.dump() + "\n";
}

RelayServer::RelayServer(RelayOptions options) : impl_(std::make_shared<Impl>(std::move(options))) {}

RelayServer::~RelayServer() = default;

void RelayServer::start() {
  auto& acc = impl_->acceptor;
  const tcp::endpoint endpoint(asio::ip::make_address(impl_->options.address), impl_->options.port);
  acc.open(endpoint.protocol());
  acc.set_option(asio::socket_base::reuse_address(true));
  acc.bind(endpoint);
  acc.listen(asio::socket_base::max_listen_connections);
  impl_->bound_port = acc.local_endpoint().port();
  impl_->accept();
  impl_->arm_heartbeat();
}

std::uint16_t RelayServer::port() const { return impl_->bound_port; }

void RelayServer::run() { impl_->ioc.run(); }

void RelayServer::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor.close(ignored);
    impl->heartbeat.cancel();
    std::vector<std::shared_ptr<WsConnection>> conns;
    {
      std::lock_guard lock(impl->mutex);
      for (const auto& [id, c] : impl->connections) conns.push_back(c);
    }
    for (const auto& c : conns) c->finish();
    impl->ioc.stop();
  });
}

RelayStats RelayServer::stats() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->router.stats();
}

std::vector<RecordedEdit> RelayServer::edit_log(const std::string& session) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->router.edit_log(session);
}

}  // namespace parasync::relay
