// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "parasync/net/ws_client.hpp"

using namespace parasync::net;

TEST_CASE("relay URLs") {
  CHECK(parse_relay_url("ws://127.0.0.1:8700/ws") == RelayUrl{"127.0.0.1", 8700, "/ws"});
  CHECK(parse_relay_url("ws://relay.local") == RelayUrl{"relay.local", 80, "/ws"});
  CHECK(parse_relay_url("ws://localhost:9000") == RelayUrl{"localhost", 9000, "/ws"});
  CHECK(parse_relay_url("ws://h:1/custom/path") == RelayUrl{"h", 1, "/custom/path"});
  CHECK(parse_relay_url("ws://h:1/ws").to_string() == "ws://h:1/ws");

  CHECK_THROWS_AS(parse_relay_url("http://h:1/ws"), UrlError);
  CHECK_THROWS_AS(parse_relay_url("ws://:8700/ws"), UrlError);
  CHECK_THROWS_AS(parse_relay_url("ws://h:0/ws"), UrlError);
  CHECK_THROWS_AS(parse_relay_url("ws://h:70000/ws"), UrlError);
  CHECK_THROWS_AS(parse_relay_url("ws://h:12ab/ws"), UrlError);
  CHECK_THROWS_AS(parse_relay_url("ws://h:/ws"), UrlError);
}
