// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "parasync/host/host.hpp"
#include "parasync/host/host_core.hpp"
#include "parasync/param/evaluator.hpp"
#include "parasync/wire/mesh_frame.hpp"
#include "test_paths.hpp"

using namespace parasync;
using namespace parasync::host;
using namespace std::chrono_literals;

namespace {

param::GraphDefinition tower() { return param::load_graph(test_paths::definition("twist_tower.json")); }

/// A graph whose `ratio` node divides by the `d` parameter.
param::GraphDefinition divider() {
  return param::parse_graph(R"({
    "name": "divider",
    "params": [{"id": "d", "name": "d", "kind": "real", "min": 0, "max": 10, "native_step": 1, "value": 2}],
    "nodes": [
      {"id": "ratio", "op": "div", "inputs": {"a": 6, "b": {"param": "d"}}},
      {"id": "body", "op": "box", "inputs": {"w": {"node": "ratio"}, "h": 1, "d": 1}}
    ],
    "outputs": [{"node": "body", "model_id": 0}]
  })");
}

wire::SetParam edit(const std::string& id, param::ParamValue v, std::uint64_t seq, std::uint64_t origin = 1) {
  return wire::SetParam{id, std::move(v), seq, 1000 + seq, origin};
}

std::vector<wire::DecodedFrame> frames_of(const std::vector<Message>& msgs) {
  std::vector<wire::DecodedFrame> out;
  for (const auto& m : msgs) {
    if (const auto* bytes = std::get_if<std::vector<std::uint8_t>>(&m)) out.push_back(wire::decode_mesh(*bytes));
  }
  return out;
}

template <class T>
std::vector<T> envelopes_of(const std::vector<Message>& msgs) {
  std::vector<T> out;
  for (const auto& m : msgs) {
    if (const auto* env = std::get_if<wire::Envelope>(&m)) {
      if (const auto* t = std::get_if<T>(env)) out.push_back(*t);
    }
  }
  return out;
}

std::vector<Message> run_batch(HostCore& core) {
  const Batch batch = core.take_pending();
  return core.commit(batch, evaluate_batch(core.graph(), batch));
}

double number(const param::ParamDescriptor& d) { return std::get<double>(d.value); }

const param::ParamDescriptor& by_id(const HostCore& core, const std::string& id) {
  for (const auto& d : core.descriptors()) {
    if (d.id == id) return d;
  }
  FAIL("no descriptor " << id);
  return core.descriptors().front();
}

}  // namespace

TEST_CASE("initial state is PARAMS then one revision-1 frame per output") {
  HostCore core(tower());
  const auto msgs = core.initial_state();
  REQUIRE(msgs.size() == 3);
  const auto params = envelopes_of<wire::Params>(msgs);
  REQUIRE(params.size() == 1);
  CHECK(params[0].params.size() == 5);
  CHECK(std::holds_alternative<wire::Envelope>(msgs[0]));
  const auto frames = frames_of(msgs);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].model_id == 0);
  CHECK(frames[1].model_id == 1);
  CHECK(frames[0].revision == 1);
  CHECK(frames[1].revision == 1);
  // A second announcement (reconnect) moves revisions forward.
  CHECK(frames_of(core.initial_state())[0].revision == 2);
}

TEST_CASE("resumed revisions continue above the relay cache") {
  HostCore core(tower());
  core.resume_revisions({{0, 7}, {1, 3}});
  const auto frames = frames_of(core.initial_state());
  CHECK(frames[0].revision == 8);
  CHECK(frames[1].revision == 4);
}

TEST_CASE("an edit is snapped, applied and re-streamed") {
  HostCore core(tower());
  core.initial_state();
  REQUIRE_FALSE(core.submit(edit("height", 12.4, 1)));
  const auto msgs = run_batch(core);
  const auto frames = frames_of(msgs);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].revision == 2);
  CHECK(std::holds_alternative<std::vector<std::uint8_t>>(msgs[0]));
  const auto applied = envelopes_of<wire::Applied>(msgs);
  REQUIRE(applied.size() == 1);
  CHECK(applied[0].param_id == "height");
  CHECK(std::get<double>(applied[0].value) == 10.0);
  CHECK(applied[0].param_revision == 1);
  CHECK(applied[0].model_revisions == std::vector<wire::ModelRevision>{{0, 2}, {1, 2}});
  REQUIRE(applied[0].acks.size() == 1);
  CHECK(applied[0].acks[0].client_seq == 1);
  CHECK(number(by_id(core, "height")) == 10.0);
}

TEST_CASE("rejected edits name their reason and reply target") {
  HostCore core(tower());
  auto err = core.submit(edit("nope", 1.0, 4));
  REQUIRE(err);
  CHECK(err->code == "unknown_param");
  CHECK(err->in_reply_to == 1004u);

  err = core.submit(edit("height", true, 5));
  REQUIRE(err);
  CHECK(err->code == "kind_mismatch");

  err = core.submit(edit("core_detail", std::string("ultra"), 6));
  REQUIRE(err);
  CHECK(err->code == "unknown_choice");

  err = core.submit(wire::SetParam{"nope", 1.0, 9, std::nullopt, std::nullopt});
  CHECK(err->in_reply_to == 9u);
  CHECK_FALSE(core.has_pending());
}

TEST_CASE("edits to one parameter coalesce to the latest value") {
  HostCore core(tower());
  for (std::uint64_t i = 1; i <= 3; ++i) REQUIRE_FALSE(core.submit(edit("width", 2.0 + 2.0 * i, i, i % 2)));
  REQUIRE_FALSE(core.submit(edit("twist", 45.0, 4)));
  const auto applied = envelopes_of<wire::Applied>(run_batch(core));
  REQUIRE(applied.size() == 2);
  CHECK(applied[0].param_id == "width");
  CHECK(std::get<double>(applied[0].value) == 8.0);
  CHECK(applied[0].param_revision == 3);
  CHECK(applied[0].acks.size() == 3);
  CHECK(applied[1].param_id == "twist");
}

TEST_CASE("a failed evaluation reports the node and changes nothing") {
  HostCore core(divider());
  core.initial_state();
  const auto before = core.descriptors();
  const auto revisions = core.model_revisions();
  const auto mesh = core.meshes().at(0);

  REQUIRE_FALSE(core.submit(edit("d", 0.0, 1)));
  REQUIRE_FALSE(core.submit(edit("d", 0.2, 2)));
  const auto msgs = run_batch(core);
  CHECK(frames_of(msgs).empty());
  CHECK(envelopes_of<wire::Applied>(msgs).empty());
  const auto errors = envelopes_of<wire::Error>(msgs);
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].code == "eval_failed");
  CHECK(errors[0].message.find("'ratio'") != std::string::npos);
  CHECK(errors[0].in_reply_to == 1001u);
  CHECK(errors[1].in_reply_to == 1002u);
  CHECK(core.descriptors() == before);
  CHECK(core.model_revisions() == revisions);
  CHECK(geometry::bitwise_equal(core.meshes().at(0), mesh));

  REQUIRE_FALSE(core.submit(edit("d", 3.0, 3)));
  const auto ok = run_batch(core);
  CHECK(frames_of(ok).at(0).revision == revisions.at(0) + 1);
  CHECK(envelopes_of<wire::Applied>(ok).at(0).param_revision == 1);
}

TEST_CASE("property: any batching converges to a fresh evaluation and revisions rise") {
  const auto graph = tower();
  std::mt19937_64 rng(99);
  for (int round = 0; round < 20; ++round) {
    HostCore core(graph);
    core.initial_state();
    std::map<std::uint32_t, std::uint64_t> last{{0, 1}, {1, 1}};
    const int edits = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < edits; ++i) {
      const auto& d = core.descriptors()[rng() % core.descriptors().size()];
      param::ParamValue v;
      if (d.kind == param::ParamKind::choice) {
        v = d.choices[rng() % d.choices.size()];
      } else {
        v = std::uniform_real_distribution<double>(*d.min - 5, *d.max + 5)(rng);
      }
      REQUIRE_FALSE(core.submit(edit(d.id, v, static_cast<std::uint64_t>(i + 1))));
      if (rng() % 4 == 0 || i + 1 == edits) {
        for (const auto& f : frames_of(run_batch(core))) {
          CHECK(f.revision > last[f.model_id]);
          last[f.model_id] = f.revision;
        }
      }
    }
    const auto fresh = param::evaluate(graph, param::bindings_of(core.descriptors()));
    for (const auto& [id, mesh] : fresh) CHECK(geometry::bitwise_equal(core.meshes().at(id), mesh));
  }
}

TEST_CASE("throttle: leading edge, then at most one start per interval") {
  using TP = Throttle::Clock::time_point;
  Throttle t(33ms);
  const TP t0{};
  CHECK(t.next_start(t0) == t0);
  t.started(t0);
  CHECK(t.next_start(t0 + 10ms) == t0 + 33ms);
  CHECK(t.next_start(t0 + 40ms) == t0 + 40ms);

  // 100 edits spread over 50 ms with instantaneous evaluation: count starts.
  Throttle sim(33ms);
  std::optional<TP> scheduled;
  bool pending = false;
  int evaluations = 0;
  auto tick = [&](TP now) {
    if (scheduled && *scheduled <= now) {
      sim.started(*scheduled);
      ++evaluations;
      scheduled.reset();
      pending = false;
    }
  };
  for (int i = 0; i < 100; ++i) {
    const TP now = t0 + std::chrono::microseconds(500 * i);
    tick(now);
    pending = true;
    if (!scheduled) {
      const TP at = sim.next_start(now);
      if (at <= now) {
        sim.started(now);
        ++evaluations;
        pending = false;
      } else {
        scheduled = at;
      }
    }
  }
  if (pending && scheduled) tick(*scheduled);
  CHECK(evaluations <= 3);  // ceil(50 / 33) + 1
  CHECK(evaluations >= 2);
}

TEST_CASE("reconnect backoff doubles from the base up to the cap") {
  CHECK(Host::backoff(500ms, 30s, 0) == 500ms);
  CHECK(Host::backoff(500ms, 30s, 1) == 1000ms);
  CHECK(Host::backoff(500ms, 30s, 5) == 16000ms);
  CHECK(Host::backoff(500ms, 30s, 6) == 30000ms);
  CHECK(Host::backoff(500ms, 30s, 400) == 30000ms);
}

TEST_CASE("a graph that cannot evaluate is refused at construction") {
  auto graph = divider();
  graph.params[0].value = 0.0;
  CHECK_THROWS_AS(HostCore{graph}, param::GraphError);
}
