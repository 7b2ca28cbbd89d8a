// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>
#include <sys/wait.h>

#include <array>
#include <boost/asio/ip/tcp.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "loop_fixture.hpp"
#include "parasync/param/evaluator.hpp"

using namespace parasync;
using namespace std::chrono_literals;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

/// Runs the CLI through the shell, capturing stdout; stderr is discarded.
Run cli(const std::string& args, const std::string& env = "") {
  const std::string command = env + " " + PARASYNC_CLI + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run run;
  std::array<char, 4096> buffer{};
  while (const std::size_t n = std::fread(buffer.data(), 1, buffer.size(), pipe)) run.out.append(buffer.data(), n);
  const int status = ::pclose(pipe);
  run.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

std::string relay_flag(const loop::RelayThread& relay) { return "--relay " + relay.url().to_string(); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> result;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) result.push_back(line);
  return result;
}

struct ObjMesh {
  std::vector<double> positions;
  std::vector<std::uint32_t> triangles;
};

ObjMesh read_obj(const std::string& path) {
  ObjMesh mesh;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      mesh.positions.insert(mesh.positions.end(), {x, y, z});
    } else if (tag == "f") {
      for (int i = 0; i < 3; ++i) {
        std::uint32_t index;
        ls >> index;
        mesh.triangles.push_back(index - 1);
      }
    }
  }
  return mesh;
}

}  // namespace

TEST_CASE("set snaps to the quantized grid and prints the applied value") {
  loop::RelayThread relay;
  auto host = loop::start_host(relay.url(), "default");
  REQUIRE(host->wait_ready(5s));
  const auto run = cli("client set height 12.4 " + relay_flag(relay));
  CHECK(run.code == 0);
  CHECK(run.out == "height 10\n");

  const auto json_run = cli("client set floors 6 --json " + relay_flag(relay));
  CHECK(json_run.code == 0);
  const auto doc = nlohmann::json::parse(json_run.out);
  CHECK(doc["param_id"] == "floors");
  CHECK(doc["value"] == 6);
  CHECK(doc["model_revisions"]["0"] == 3);
}

TEST_CASE("watch --count 1 after one edit prints one line at revision 2") {
  loop::RelayThread relay;
  auto host = loop::start_host(relay.url(), "s");
  REQUIRE(host->wait_ready(5s));
  REQUIRE(cli("client set height 40 --session s " + relay_flag(relay)).code == 0);
  const auto run = cli("client watch --count 1 --session s " + relay_flag(relay));
  CHECK(run.code == 0);
  const auto out = lines(run.out);
  REQUIRE(out.size() == 1);
  CHECK(out[0].find("revision 2 ") != std::string::npos);
  CHECK(out[0].rfind("model ", 0) == 0);

  const auto json_run = cli("client watch --count 2 --json --session s " + relay_flag(relay));
  const auto json_lines = lines(json_run.out);
  REQUIRE(json_lines.size() == 2);
  for (const auto& line : json_lines) {
    const auto doc = nlohmann::json::parse(line);
    CHECK(doc["revision"] == 2);
    CHECK(doc["bytes"].get<std::size_t>() == 24 + 12 * doc["vertices"].get<std::size_t>() +
                                                 12 * doc["triangles"].get<std::size_t>());
  }
}

TEST_CASE("params prints one JSON document of announced descriptors") {
  loop::RelayThread relay;
  auto host = loop::start_host(relay.url(), "default");
  REQUIRE(host->wait_ready(5s));
  const auto run = cli("client params " + relay_flag(relay));
  CHECK(run.code == 0);
  const auto doc = nlohmann::json::parse(run.out);
  REQUIRE(doc.is_array());
  CHECK(doc.size() == param::announce(loop::tower()).size());
  CHECK(doc[0]["id"] == "height");
  CHECK(doc[0].contains("quantized_step"));
  CHECK(lines(cli("client params --json " + relay_flag(relay)).out).size() == 1);
}

TEST_CASE("dump writes OBJ equal to the decoded frame within 1e-5") {
  loop::RelayThread relay;
  auto host = loop::start_host(relay.url(), "default");
  REQUIRE(host->wait_ready(5s));
  auto watcher = loop::join(relay.url(), "default");
  const std::string path = std::string(PARASYNC_BINARY_DIR) + "/cli_dump_test.obj";
  for (std::uint32_t model : {0u, 1u}) {
    const auto run = cli("client dump --model " + std::to_string(model) + " --out " + path + " " + relay_flag(relay));
    REQUIRE(run.code == 0);
    const auto obj = read_obj(path);
    const auto snapshot = watcher->snapshot();
    const auto& frame = snapshot.meshes.at(model).mesh;
    REQUIRE(obj.positions.size() == frame.positions.size());
    double worst = 0;
    for (std::size_t i = 0; i < obj.positions.size(); ++i) {
      worst = std::max(worst, std::abs(obj.positions[i] - static_cast<double>(frame.positions[i])));
    }
    CHECK(worst <= 1e-5);
    CHECK(obj.triangles == frame.triangles);
  }
  std::remove(path.c_str());
}

TEST_CASE("exit codes") {
  loop::RelayThread relay;
  auto host = loop::start_host(relay.url(), "default");
  REQUIRE(host->wait_ready(5s));

  SUBCASE("usage") {
    CHECK(cli("").code == 1);
    CHECK(cli("client").code == 1);
    CHECK(cli("client set height").code == 1);
    CHECK(cli("client set height tall " + relay_flag(relay)).code == 1);
    CHECK(cli("client params --relay http://x/ws").code == 1);
    CHECK(cli("host --definition /nonexistent/definition.json").code == 1);
    CHECK(cli("--help").code == 0);
  }
  SUBCASE("remote error") {
    CHECK(cli("client set nosuch 1 " + relay_flag(relay)).code == 2);
    CHECK(cli("client set core_detail nosuchchoice " + relay_flag(relay)).code == 2);
    CHECK(cli("client params --session nobody " + relay_flag(relay)).code == 2);
  }
  SUBCASE("connect") {
    CHECK(cli("client params --relay ws://127.0.0.1:1/ws").code == 4);
  }
  SUBCASE("timeout") {
    boost::asio::io_context ioc;
    boost::asio::ip::tcp::acceptor silent(ioc, {boost::asio::ip::make_address("127.0.0.1"), 0});
    const std::string url = "ws://127.0.0.1:" + std::to_string(silent.local_endpoint().port()) + "/ws";
    const auto started = std::chrono::steady_clock::now();
    CHECK(cli("client params --timeout-ms 300 --relay " + url).code == 3);
    CHECK(std::chrono::steady_clock::now() - started < 3s);
  }
  SUBCASE("environment overrides --relay") {
    CHECK(cli("client params --relay ws://127.0.0.1:1/ws", "PARASYNC_RELAY=" + relay.url().to_string()).code == 0);
    CHECK(cli("client params " + relay_flag(relay), "PARASYNC_RELAY=ws://127.0.0.1:1/ws").code == 4);
  }
}

TEST_CASE("export evaluates locally") {
  const std::string path = std::string(PARASYNC_BINARY_DIR) + "/cli_export_test.obj";
  const auto run = cli("export --definition " + std::string(PARASYNC_SOURCE_DIR) +
                       "/definitions/twist_tower.json --model 0 --set height=12.4 --out " + path);
  CHECK(run.code == 0);
  auto descriptors = param::announce(loop::tower());
  for (auto& d : descriptors) {
    if (d.id == "height") d.value = param::snap(d, 12.4);
  }
  const auto expected = param::evaluate(loop::tower(), param::bindings_of(descriptors)).at(0);
  CHECK(read_obj(path).triangles == expected.triangles);
  std::remove(path.c_str());
}

TEST_CASE("bench --local reports latency percentiles") {
  const auto run = cli("bench --edits 10 --json --local " + std::string(PARASYNC_SOURCE_DIR) +
                       "/definitions/twist_tower.json");
  CHECK(run.code == 0);
  const auto doc = nlohmann::json::parse(run.out);
  CHECK(doc["samples"] == 10);
  CHECK(doc["errors"] == 0);
  CHECK(doc["min_ms"].get<double>() <= doc["p95_ms"].get<double>());
  CHECK(doc["p95_ms"].get<double>() <= doc["max_ms"].get<double>());
}
