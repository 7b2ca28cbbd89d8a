// SPDX-License-Identifier: Apache-2.0
#include "parasync/net/ws_client.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <charconv>
#include <deque>
#include <variant>

namespace parasync::net {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

std::string RelayUrl::to_string() const { return "ws://" + host + ":" + std::to_string(port) + path; }

RelayUrl parse_relay_url(std::string_view url) {
  constexpr std::string_view scheme = "ws://";
  if (url.substr(0, scheme.size()) != scheme) throw UrlError("relay URL must start with ws://: '" + std::string(url) + "'");
  std::string_view rest = url.substr(scheme.size());
  RelayUrl out;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) out.path = std::string(rest.substr(slash));
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const std::string_view port = authority.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || port.empty() || value == 0 || value > 65535) {
      throw UrlError("invalid port in relay URL: '" + std::string(url) + "'");
    }
    out.port = static_cast<std::uint16_t>(value);
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw UrlError("relay URL has no host: '" + std::string(url) + "'");
  out.host = std::string(authority);
  return out;
}

namespace {

class BeastClient final : public WsClient {
 public:
  BeastClient(asio::io_context& ioc, RelayUrl url, Handlers handlers, std::size_t max_message)
      : ioc_(ioc), resolver_(ioc), ws_(ioc), url_(std::move(url)), handlers_(std::move(handlers)),
        max_message_(max_message) {}

  void connect() override {
    asio::post(ioc_, [self = shared()] {
      self->resolver_.async_resolve(self->url_.host, std::to_string(self->url_.port),
                                    [self](beast::error_code ec, tcp::resolver::results_type results) {
                                      if (ec) return self->fail("resolve: " + ec.message());
                                      self->on_resolve(results);
                                    });
    });
  }

  void send_text(std::string text) override {
    asio::post(ioc_, [self = shared(), text = std::move(text)]() mutable {
      self->enqueue(Item{std::make_shared<const std::string>(std::move(text))});
    });
  }

  void send_binary(std::shared_ptr<const std::vector<std::uint8_t>> bytes) override {
    asio::post(ioc_, [self = shared(), bytes = std::move(bytes)]() mutable { self->enqueue(Item{std::move(bytes)}); });
  }

  void close() override {
    asio::post(ioc_, [self = shared()] {
      if (self->done_) return;
      if (!self->open_) {
        self->fail("closed");
        return;
      }
      self->closing_ = true;
      if (!self->writing_) self->start_close();
    });
  }

 private:
  using Payload = std::variant<std::shared_ptr<const std::string>, std::shared_ptr<const std::vector<std::uint8_t>>>;
  struct Item {
    Payload payload;
  };

  std::shared_ptr<BeastClient> shared() { return std::static_pointer_cast<BeastClient>(shared_from_this()); }

  void on_resolve(const tcp::resolver::results_type& results) {
    beast::get_lowest_layer(ws_).expires_after(std::chrono::seconds(10));
    beast::get_lowest_layer(ws_).async_connect(results, [self = shared()](beast::error_code ec, const tcp::endpoint&) {
      if (ec) return self->fail("connect: " + ec.message());
      beast::error_code ignored;
      beast::get_lowest_layer(self->ws_).socket().set_option(tcp::no_delay(true), ignored);
      beast::get_lowest_layer(self->ws_).expires_never();
      websocket::stream_base::timeout t{};
      t.handshake_timeout = std::chrono::seconds(10);
      t.idle_timeout = std::chrono::seconds(30);
      t.keep_alive_pings = true;
      self->ws_.set_option(t);
      self->ws_.read_message_max(self->max_message_);
      self->ws_.auto_fragment(false);
      const std::string host = self->url_.host + ":" + std::to_string(self->url_.port);
      self->ws_.async_handshake(host, self->url_.path, [self](beast::error_code ec) {
        if (ec) return self->fail("handshake: " + ec.message());
        self->open_ = true;
        if (self->handlers_.on_open) self->handlers_.on_open();
        self->read();
        if (!self->queue_.empty() && !self->writing_) self->write_next();
      });
    });
  }

  void read() {
    ws_.async_read(buffer_, [self = shared()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail(ec == websocket::error::closed ? "closed by relay" : "read: " + ec.message());
      const auto data = self->buffer_.cdata();
      const auto* p = static_cast<const std::uint8_t*>(data.data());
      if (self->ws_.got_text()) {
        std::string text(reinterpret_cast<const char*>(p), data.size());
        self->buffer_.consume(self->buffer_.size());
        if (self->handlers_.on_text) self->handlers_.on_text(std::move(text));
      } else {
        std::vector<std::uint8_t> bytes(p, p + data.size());
        self->buffer_.consume(self->buffer_.size());
        if (self->handlers_.on_binary) self->handlers_.on_binary(std::move(bytes));
      }
      if (!self->done_) self->read();
    });
  }

  void enqueue(Item item) {
    if (done_ || closing_) return;
    queue_.push_back(std::move(item));
    if (open_ && !writing_) write_next();
  }

  void write_next() {
    writing_ = true;
    auto done = [self = shared()](beast::error_code ec, std::size_t) {
      if (ec) return self->fail("write: " + ec.message());
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write_next();
      } else {
        self->writing_ = false;
        if (self->closing_) self->start_close();
      }
    };
    const Payload& payload = queue_.front().payload;
    if (const auto* text = std::get_if<0>(&payload)) {
      ws_.text(true);
      ws_.async_write(asio::buffer(**text), done);
    } else {
      ws_.binary(true);
      ws_.async_write(asio::buffer(*std::get<1>(payload)), done);
    }
  }

  void start_close() {
    ws_.async_close(websocket::close_code::normal, [self = shared()](beast::error_code) { self->fail("closed"); });
  }

  void fail(const std::string& reason) {
    if (done_) return;
    done_ = true;
    open_ = false;
    beast::error_code ignored;
    resolver_.cancel();
    beast::get_lowest_layer(ws_).socket().close(ignored);
    queue_.clear();
    if (handlers_.on_close) handlers_.on_close(reason);
  }

  asio::io_context& ioc_;
  tcp::resolver resolver_;
  websocket::stream<beast::tcp_stream> ws_;
  RelayUrl url_;
  Handlers handlers_;
  std::size_t max_message_;
  beast::flat_buffer buffer_;
  std::deque<Item> queue_;
  bool open_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool done_ = false;
};

}  // namespace

std::shared_ptr<WsClient> WsClient::create(asio::io_context& ioc, RelayUrl url, Handlers handlers,
                                           std::size_t max_message) {
  return std::make_shared<BeastClient>(ioc, std::move(url), std::move(handlers), max_message);
}

}  // namespace parasync::net
