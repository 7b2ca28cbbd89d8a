// SPDX-License-Identifier: Apache-2.0
// parasync: relay, host, scripted client, benchmark and export in one binary.
#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "parasync/client/bench.hpp"
#include "parasync/client/scripted_client.hpp"
#include "parasync/geometry/obj.hpp"
#include "parasync/host/host.hpp"
#include "parasync/param/evaluator.hpp"
#include "parasync/param/json.hpp"
#include "parasync/relay/server.hpp"

using namespace parasync;
using nlohmann::json;

namespace {

enum Exit : int { ok = 0, usage = 1, remote = 2, timeout = 3, connect = 4 };

constexpr const char* kDefaultRelay = "ws://127.0.0.1:8700/ws";

struct Common {
  std::string relay = kDefaultRelay;
  std::string session = "default";
  std::string name;
  int timeout_ms = 5000;
  bool json = false;

  net::RelayUrl url() const {
    if (const char* env = std::getenv("PARASYNC_RELAY"); env != nullptr && *env != '\0') {
      return net::parse_relay_url(env);
    }
    return net::parse_relay_url(relay);
  }
  std::chrono::milliseconds timeout() const { return std::chrono::milliseconds(timeout_ms); }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int fail(int code, const std::string& message) {
  std::cerr << "parasync: " << message << "\n";
  return code;
}

int exit_for(const client::ClientError& e) {
  switch (e.kind()) {
    case client::ClientError::Kind::connect: return Exit::connect;
    case client::ClientError::Kind::timeout: return Exit::timeout;
    case client::ClientError::Kind::remote:
    case client::ClientError::Kind::protocol: return Exit::remote;
  }
  return Exit::remote;
}

/// Blocks until SIGINT or SIGTERM, then runs `on_signal`.
std::thread signal_thread(boost::asio::io_context& ioc, std::function<void()> on_signal) {
  auto signals = std::make_shared<boost::asio::signal_set>(ioc, SIGINT, SIGTERM);
  signals->async_wait([signals, on_signal](const boost::system::error_code& ec, int) {
    if (!ec) on_signal();
  });
  return std::thread([&ioc] { ioc.run(); });
}

std::pair<std::string, std::uint16_t> split_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen expects HOST:PORT, got '" + listen + "'");
  const std::string port = listen.substr(colon + 1);
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(port, &used);
    if (used != port.size() || value > 65535) throw std::out_of_range(port);
    return {listen.substr(0, colon), static_cast<std::uint16_t>(value)};
  } catch (const std::logic_error&) {
    throw UsageError("invalid port in --listen '" + listen + "'");
  }
}

// --- relay -------------------------------------------------------------------

struct RelayArgs {
  std::string listen = "127.0.0.1:8700";
  std::size_t frame_cap = 64u << 20;
  int heartbeat_ms = 5000;
  int dead_after_ms = 15000;
};

int run_relay(const RelayArgs& args) {
  relay::RelayOptions options;
  std::tie(options.address, options.port) = split_listen(args.listen);
  options.frame_cap = args.frame_cap;
  options.heartbeat = std::chrono::milliseconds(args.heartbeat_ms);
  options.dead_after = std::chrono::milliseconds(args.dead_after_ms);
  relay::RelayServer server(options);
  try {
    server.start();
  } catch (const std::exception& e) {
    return fail(Exit::connect, "cannot listen on " + args.listen + ": " + e.what());
  }
  std::cerr << "parasync relay listening on ws://" << options.address << ":" << server.port() << "/ws\n";
  boost::asio::io_context sig_ioc;
  auto sig = signal_thread(sig_ioc, [&] { server.stop(); });
  server.run();
  sig_ioc.stop();
  sig.join();
  return Exit::ok;
}

// --- host --------------------------------------------------------------------

struct HostArgs {
  std::string definition;
  int debounce_ms = 33;
};

param::GraphDefinition load_definition(const std::string& path) {
  try {
    return param::load_graph(path);
  } catch (const param::GraphError& e) {
    throw UsageError("invalid definition " + path + ": " + e.what());
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

int run_host(const Common& common, const HostArgs& args) {
  host::HostOptions options;
  options.relay = common.url();
  options.session = common.session;
  options.name = common.name.empty() ? "host" : common.name;
  options.debounce = std::chrono::milliseconds(args.debounce_ms);
  options.log = [](const std::string& line) { std::cerr << "parasync host: " << line << "\n"; };
  std::unique_ptr<host::Host> host;
  try {
    host = std::make_unique<host::Host>(load_definition(args.definition), options);
  } catch (const param::GraphError& e) {
    throw UsageError("definition " + args.definition + " does not evaluate: " + e.what());
  }
  boost::asio::io_context sig_ioc;
  auto sig = signal_thread(sig_ioc, [&] { host->stop(); });
  host->run();
  sig_ioc.stop();
  sig.join();
  return Exit::ok;
}

// --- client ------------------------------------------------------------------

std::unique_ptr<client::ScriptedClient> join(const Common& common) {
  auto c = std::make_unique<client::ScriptedClient>(common.url(), common.session,
                                                    common.name.empty() ? "cli" : common.name);
  c->connect(common.timeout());
  return c;
}

int client_params(const Common& common) {
  auto c = join(common);
  const auto snap = c->snapshot();
  if (snap.params.empty() && !snap.host_present) return fail(Exit::remote, "session '" + common.session + "' has no host");
  json doc = json::array();
  for (const auto& d : snap.params) doc.push_back(param::descriptor_to_json(d));
  std::cout << (common.json ? doc.dump() : doc.dump(2)) << "\n";
  return Exit::ok;
}

param::ParamValue parse_value(const client::ClientSnapshot& snap, const std::string& id, const std::string& text) {
  const param::ParamDescriptor* d = nullptr;
  for (const auto& p : snap.params) {
    if (p.id == id) d = &p;
  }
  if (d != nullptr && d->kind == param::ParamKind::choice) return text;
  if (d != nullptr && d->kind == param::ParamKind::boolean) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw UsageError("parameter '" + id + "' expects true or false, got '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  if (d != nullptr) throw UsageError("parameter '" + id + "' expects a number, got '" + text + "'");
  return text;
}

json value_json(const client::ClientSnapshot& snap, const std::string& id, const param::ParamValue& v) {
  for (const auto& p : snap.params) {
    if (p.id == id) return param::value_to_json(v, p.kind);
  }
  return param::value_to_json(v, std::holds_alternative<double>(v) ? param::ParamKind::real
                                 : std::holds_alternative<bool>(v) ? param::ParamKind::boolean
                                                                   : param::ParamKind::choice);
}

std::string value_text(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9.0e15) return std::to_string(static_cast<long long>(v));
  }
  return j.dump();
}

int client_set(const Common& common, const std::vector<std::string>& pairs) {
  if (pairs.empty() || pairs.size() % 2 != 0) throw UsageError("set expects PARAM VALUE pairs");
  auto c = join(common);
  const auto snap = c->snapshot();
  std::vector<std::pair<std::string, param::ParamValue>> edits;
  for (std::size_t i = 0; i < pairs.size(); i += 2) edits.emplace_back(pairs[i], parse_value(snap, pairs[i], pairs[i + 1]));
  int code = Exit::ok;
  for (const auto& [id, value] : edits) {
    const auto outcome = c->set(id, value, common.timeout());
    const double ms = std::chrono::duration<double, std::milli>(outcome.latency).count();
    if (const auto* err = std::get_if<wire::Error>(&outcome.reply)) {
      std::cerr << "parasync: " << id << ": " << err->code << ": " << err->message << "\n";
      if (common.json) std::cout << json{{"param_id", id}, {"error", err->code}, {"message", err->message}}.dump() << "\n";
      code = Exit::remote;
      continue;
    }
    const auto& applied = std::get<wire::Applied>(outcome.reply);
    if (common.json) {
      json revs = json::object();
      for (const auto& r : applied.model_revisions) revs[std::to_string(r.model_id)] = r.revision;
      std::cout << json{{"param_id", applied.param_id},
                        {"value", value_json(snap, applied.param_id, applied.value)},
                        {"param_revision", applied.param_revision},
                        {"model_revisions", revs},
                        {"latency_ms", ms}}
                       .dump()
                << "\n";
    } else {
      std::cout << applied.param_id << " " << value_text(value_json(snap, applied.param_id, applied.value)) << "\n";
    }
  }
  return code;
}

int client_watch(const Common& common, int count, int idle_ms) {
  auto c = std::make_unique<client::ScriptedClient>(common.url(), common.session,
                                                    common.name.empty() ? "cli" : common.name);
  std::mutex mutex;
  std::condition_variable cv;
  int printed = 0;
  c->on_frame([&](const client::FrameEvent& f) {
    std::lock_guard lock(mutex);
    if (count > 0 && printed >= count) return;
    if (common.json) {
      std::cout << json{{"model_id", f.model_id},
                        {"revision", f.revision},
                        {"vertices", f.vertex_count},
                        {"triangles", f.triangle_count},
                        {"bytes", f.byte_length}}
                       .dump();
    } else {
      std::cout << "model " << f.model_id << " revision " << f.revision << " vertices " << f.vertex_count
                << " triangles " << f.triangle_count << " bytes " << f.byte_length;
    }
    std::cout << std::endl;
    ++printed;
    cv.notify_all();
  });
  c->connect(common.timeout());
  std::unique_lock lock(mutex);
  int seen = -1;
  while (count <= 0 || printed < count) {
    if (c->closed_reason()) return fail(Exit::connect, "relay closed the connection: " + *c->closed_reason());
    if (printed != seen) {
      seen = printed;
      const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(idle_ms);
      while (printed == seen && !c->closed_reason()) {
        if (idle_ms > 0) {
          if (cv.wait_until(lock, deadline) == std::cv_status::timeout && printed == seen) {
            return fail(Exit::timeout, "no frame within " + std::to_string(idle_ms) + " ms");
          }
        } else {
          cv.wait_for(lock, std::chrono::milliseconds(200));
        }
      }
    }
  }
  return Exit::ok;
}

int client_dump(const Common& common, std::uint32_t model, const std::string& out) {
  auto c = join(common);
  const bool found =
      c->wait_for([&](const client::ClientSnapshot& s) { return s.meshes.count(model) != 0; }, common.timeout());
  if (!found) return fail(Exit::remote, "session '" + common.session + "' has no model " + std::to_string(model));
  const auto snap = c->snapshot();
  const auto& m = snap.meshes.at(model);
  std::ofstream file(out);
  if (!file) throw UsageError("cannot write " + out);
  file << geometry::export_obj(m.mesh);
  if (!file.flush()) throw UsageError("cannot write " + out);
  if (common.json) {
    std::cout << json{{"model_id", model}, {"revision", m.revision}, {"vertices", m.mesh.vertex_count()},
                      {"triangles", m.mesh.triangle_count()}, {"out", out}}
                     .dump()
              << "\n";
  } else {
    std::cout << "wrote " << out << " (model " << model << " revision " << m.revision << ", "
              << m.mesh.vertex_count() << " vertices, " << m.mesh.triangle_count() << " triangles)\n";
  }
  return Exit::ok;
}

// --- bench -------------------------------------------------------------------

struct BenchArgs {
  std::size_t edits = 50;
  std::uint64_t seed = 1;
  std::string local;
};

int run_bench(Common common, const BenchArgs& args) {
  std::unique_ptr<relay::RelayServer> server;
  std::thread server_thread;
  std::unique_ptr<host::Host> host;
  if (!args.local.empty()) {
    relay::RelayOptions ro;
    ro.port = 0;
    server = std::make_unique<relay::RelayServer>(ro);
    server->start();
    server_thread = std::thread([&] { server->run(); });
    common.relay = "ws://127.0.0.1:" + std::to_string(server->port()) + "/ws";
    ::unsetenv("PARASYNC_RELAY");
    host::HostOptions ho;
    ho.relay = common.url();
    ho.session = common.session;
    host = std::make_unique<host::Host>(load_definition(args.local), ho);
    host->start();
    if (!host->wait_ready(common.timeout())) throw client::ClientError(client::ClientError::Kind::timeout, "local host did not start");
  }
  int code = Exit::ok;
  {
    auto c = join(common);
    if (!c->wait_for([](const auto& s) { return !s.params.empty(); }, common.timeout())) {
      return fail(Exit::remote, "session '" + common.session + "' has no host");
    }
    const auto result = client::run_bench(*c, args.edits, args.seed, common.timeout());
    const auto& s = result.summary;
    if (common.json) {
      std::cout << json{{"edits", args.edits}, {"samples", s.count}, {"errors", result.errors},
                        {"min_ms", s.min_ms},  {"mean_ms", s.mean_ms}, {"p95_ms", s.p95_ms},
                        {"max_ms", s.max_ms}}
                       .dump()
                << "\n";
    } else {
      std::printf("edits %zu  errors %zu\nlatency ms  min %.3f  mean %.3f  p95 %.3f  max %.3f\n", args.edits,
                  result.errors, s.min_ms, s.mean_ms, s.p95_ms, s.max_ms);
    }
    if (result.errors != 0) code = Exit::remote;
  }
  if (host) host->stop();
  if (server) {
    server->stop();
    server_thread.join();
  }
  return code;
}

// --- export ------------------------------------------------------------------

int run_export(const std::string& definition, std::uint32_t model, const std::string& out,
               const std::vector<std::string>& assignments) {
  const auto graph = load_definition(definition);
  auto descriptors = param::announce(graph);
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects PARAM=VALUE, got '" + a + "'");
    const std::string id = a.substr(0, eq);
    client::ClientSnapshot snap;
    snap.params = descriptors;
    const auto value = parse_value(snap, id, a.substr(eq + 1));
    bool known = false;
    for (auto& d : descriptors) {
      if (d.id == id) {
        d.value = param::snap(d, value);
        known = true;
      }
    }
    if (!known) throw UsageError("unknown parameter '" + id + "'");
  }
  const auto meshes = param::evaluate(graph, param::bindings_of(descriptors));
  const auto it = meshes.find(model);
  if (it == meshes.end()) throw UsageError("definition has no model " + std::to_string(model));
  std::ofstream file(out);
  if (!file) throw UsageError("cannot write " + out);
  file << geometry::export_obj(it->second);
  std::cout << "wrote " << out << " (" << it->second.vertex_count() << " vertices, " << it->second.triangle_count()
            << " triangles)\n";
  return Exit::ok;
}

void add_common(CLI::App* app, Common& common, bool with_timeout = true) {
  app->add_option("--relay", common.relay, "Relay URL (env PARASYNC_RELAY overrides)")->capture_default_str();
  app->add_option("--session", common.session, "Session id")->capture_default_str();
  app->add_option("--name", common.name, "Display name announced to peers");
  if (with_timeout) app->add_option("--timeout-ms", common.timeout_ms, "Wait limit per request")->capture_default_str();
  app->add_flag("--json", common.json, "Line-delimited JSON output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parasync: live parametric model sync (relay, host, client)"};
  app.require_subcommand(1);

  RelayArgs relay_args;
  auto* relay_cmd = app.add_subcommand("relay", "Run the WebSocket relay");
  relay_cmd->add_option("--listen", relay_args.listen, "HOST:PORT to listen on")->capture_default_str();
  relay_cmd->add_option("--frame-cap", relay_args.frame_cap, "Largest accepted message in bytes")->capture_default_str();
  relay_cmd->add_option("--heartbeat-ms", relay_args.heartbeat_ms, "Ping interval")->capture_default_str();
  relay_cmd->add_option("--dead-after-ms", relay_args.dead_after_ms, "Drop peers silent this long")->capture_default_str();

  Common common;
  HostArgs host_args;
  auto* host_cmd = app.add_subcommand("host", "Evaluate a definition and serve it to a relay session");
  host_cmd->add_option("--definition", host_args.definition, "Graph definition JSON")->required();
  host_cmd->add_option("--debounce-ms", host_args.debounce_ms, "Minimum spacing of evaluations")->capture_default_str();
  add_common(host_cmd, common, false);

  auto* client_cmd = app.add_subcommand("client", "Scripted client");
  client_cmd->require_subcommand(1);
  add_common(client_cmd, common);
  auto* params_cmd = client_cmd->add_subcommand("params", "Print announced descriptors as JSON");
  std::vector<std::string> set_pairs;
  auto* set_cmd = client_cmd->add_subcommand("set", "Set parameters and print applied values");
  set_cmd->add_option("pairs", set_pairs, "PARAM VALUE [PARAM VALUE ...]")->required();
  int watch_count = 0;
  int idle_ms = 0;
  auto* watch_cmd = client_cmd->add_subcommand("watch", "Print one line per received frame");
  watch_cmd->add_option("--count", watch_count, "Stop after N frames (0: run until interrupted)");
  watch_cmd->add_option("--idle-timeout-ms", idle_ms, "Fail when no frame arrives for this long (0: never)");
  std::uint32_t dump_model = 0;
  std::string dump_out;
  auto* dump_cmd = client_cmd->add_subcommand("dump", "Write a model's latest mesh as OBJ");
  dump_cmd->add_option("--model", dump_model, "Model id")->capture_default_str();
  dump_cmd->add_option("--out", dump_out, "Output .obj path")->required();
  for (auto* sub : {params_cmd, set_cmd, watch_cmd, dump_cmd}) sub->fallthrough();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Measure edit-to-frame latency");
  bench_cmd->add_option("--edits", bench_args.edits, "Number of edits")->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--local", bench_args.local, "Run an in-process relay and host for this definition");
  add_common(bench_cmd, common);

  std::string export_def;
  std::uint32_t export_model = 0;
  std::string export_out;
  std::vector<std::string> export_sets;
  auto* export_cmd = app.add_subcommand("export", "Evaluate a definition locally and write OBJ");
  export_cmd->add_option("--definition", export_def, "Graph definition JSON")->required();
  export_cmd->add_option("--model", export_model, "Model id")->capture_default_str();
  export_cmd->add_option("--out", export_out, "Output .obj path")->required();
  export_cmd->add_option("--set", export_sets, "PARAM=VALUE overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*relay_cmd) return run_relay(relay_args);
    if (*host_cmd) return run_host(common, host_args);
    if (*bench_cmd) return run_bench(common, bench_args);
    if (*export_cmd) return run_export(export_def, export_model, export_out, export_sets);
    if (*params_cmd) return client_params(common);
    if (*set_cmd) return client_set(common, set_pairs);
    if (*watch_cmd) return client_watch(common, watch_count, idle_ms);
    if (*dump_cmd) return client_dump(common, dump_model, dump_out);
  } catch (const UsageError& e) {
    return fail(Exit::usage, e.what());
  } catch (const net::UrlError& e) {
    return fail(Exit::usage, e.what());
  } catch (const client::ClientError& e) {
    return fail(exit_for(e), e.what());
  } catch (const param::GraphError& e) {
    return fail(Exit::usage, e.what());
  } catch (const param::ParamError& e) {
    return fail(Exit::usage, e.what());
  }
  return Exit::usage;
}
