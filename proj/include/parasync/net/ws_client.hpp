// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/asio/io_context.hpp>

namespace parasync::net {

/// ws://host[:port][/path]; the path defaults to /ws and the port to 80.
struct RelayUrl {
  std::string host;
  std::uint16_t port = 80;
  std::string path = "/ws";

  std::string to_string() const;
  bool operator==(const RelayUrl&) const = default;
};

class UrlError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

RelayUrl parse_relay_url(std::string_view url);

/// Single WebSocket connection driven by a caller-owned io_context. Callbacks
/// run on that context; send/close may be called from any thread.
class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  struct Handlers {
    std::function<void()> on_open;
    std::function<void(std::string)> on_text;
    std::function<void(std::vector<std::uint8_t>)> on_binary;
    /// Fires once: after a failed connect or when an open connection ends.
    std::function<void(const std::string& reason)> on_close;
  };

  static std::shared_ptr<WsClient> create(boost::asio::io_context& ioc, RelayUrl url, Handlers handlers,
                                          std::size_t max_message = 64u << 20);
  virtual ~WsClient() = default;

  virtual void connect() = 0;
  virtual void send_text(std::string text) = 0;
  virtual void send_binary(std::shared_ptr<const std::vector<std::uint8_t>> bytes) = 0;
  virtual void close() = 0;
};

}  // namespace parasync::net
