// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "mesh_oracle.hpp"
#include "parasync/geometry/mesh.hpp"
#include "parasync/param/descriptor.hpp"
#include "parasync/param/evaluator.hpp"
#include "parasync/param/graph.hpp"
#include "parasync/param/json.hpp"
#include "test_paths.hpp"

using namespace parasync::param;

namespace {

// --- oracles -------------------------------------------------------------

/// Native values min, min+step, ... ≤ max enumerated one by one.
std::vector<double> enumerate_grid(double min, double max, double step) {
  std::vector<double> values;
  for (long k = 0;; ++k) {
    const double v = min + static_cast<double>(k) * step;
    // Slack: a billionth of the distance walked plus a few ulps of max.
    const double slack = 1e-9 * step * std::max<double>(1, k) + 4 * std::nextafter(std::abs(max), INFINITY) - 4 * std::abs(max);
    if (v > max + slack) break;
    values.push_back(v);
  }
  return values;
}

/// Quantized step by search: smallest multiplier m whose m·limit native
/// intervals cover all of them.
double quantize_by_search(double min, double max, double native_step, int limit) {
  const std::size_t intervals = enumerate_grid(min, max, native_step).size() - 1;
  std::size_t m = 1;
  while (m * static_cast<std::size_t>(limit) < intervals) ++m;
  return static_cast<double>(m) * native_step;
}

/// Nearest selectable value, ties going to the larger one.
double nearest_selectable(const std::vector<double>& grid, double x) {
  double best = grid.front();
  for (double v : grid) {
    const double dv = std::abs(x - v), db = std::abs(x - best);
    if (dv < db || (dv == db && v > best)) best = v;
  }
  return best;
}

ParamDescriptor real_param(double min, double max, std::optional<double> step, double value = 0) {
  ParamDescriptor d;
  d.id = "p";
  d.kind = ParamKind::real;
  d.min = min;
  d.max = max;
  d.native_step = step;
  d.value = value < min ? min : value;
  return make_descriptor(d);
}

}  // namespace

TEST_CASE("quantize [0,100] step 1 gives step 5 and 21 values") {
  const double oracle_step = quantize_by_search(0, 100, 1, 20);
  CHECK(oracle_step == 5.0);
  CHECK(quantize(0, 100, 1.0, 20) == 5.0);
  const auto grid = enumerate_grid(0, 100, 5);
  CHECK(grid.size() == 21);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 100.0);
  CHECK(selectable_count(0, 100, 5) == 21);
}

TEST_CASE("quantize keeps a native step that already fits") {
  CHECK(quantize(0, 10, 1.0, 20) == 1.0);
  CHECK(selectable_count(0, 10, 1) == 11);
}

TEST_CASE("quantize continuous [0,1] gives step 0.05 and 21 values") {
  const double step = quantize(0, 1, std::nullopt, 20);
  CHECK(step == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(enumerate_grid(0, 1, step).size() == 21);
  CHECK(selectable_count(0, 1, step) == 21);
}

TEST_CASE("quantize rejects bad domains") {
  CHECK_THROWS_AS(quantize(1, 1, 1.0), ParamError);
  CHECK_THROWS_AS(quantize(2, 1, 1.0), ParamError);
  CHECK_THROWS_AS(quantize(0, 1, 0.0), ParamError);
  CHECK_THROWS_AS(quantize(0, 1, -1.0), ParamError);
  CHECK_THROWS_AS(quantize(0, 1, 5.0), ParamError);  // step wider than the range
  CHECK_THROWS_AS(quantize(0, NAN, 1.0), ParamError);
  CHECK_THROWS_AS(quantize(0, 1, 0.1, 0), ParamError);
  try {
    quantize(3, 3, 1.0);
  } catch (const ParamError& e) {
    CHECK(e.code() == ParamErrorCode::domain);
  }
}

TEST_CASE("quantization property over random ranges") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lo(-1000, 1000);
  std::uniform_real_distribution<double> log_span(-3, 4);
  std::uniform_int_distribution<int> native_count(1, 5000);
  for (int i = 0; i < 2000; ++i) {
    const double min = lo(rng);
    const double max = min + std::pow(10.0, log_span(rng));
    std::optional<double> native;
    if (rng() % 3 != 0) native = (max - min) / native_count(rng) * (rng() % 2 ? 1.0 : 0.999);
    const double step = quantize(min, max, native);
    const auto grid = enumerate_grid(min, max, step);
    INFO("range [" << min << ", " << max << "] native " << native.value_or(-1) << " step " << step);
    CHECK(grid.size() >= 2);
    CHECK(grid.size() <= 21);
    CHECK(grid.size() == selectable_count(min, max, step));
    CHECK(grid.front() == min);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      CHECK(grid[k] - grid[k - 1] == doctest::Approx(step).epsilon(1e-9));
      CHECK(grid[k] <= max + 1e-8 * step * k);
    }
    if (native) CHECK(step == doctest::Approx(quantize_by_search(min, max, *native, 20)).epsilon(1e-12));
  }
}

TEST_CASE("snap rounds to the nearest selectable value") {
  const ParamDescriptor d = real_param(0, 100, 1.0);
  REQUIRE(d.quantized_step == 5.0);
  const auto grid = enumerate_grid(0, 100, 5);
  CHECK(nearest_selectable(grid, 12.4) == 10.0);
  CHECK(std::get<double>(snap(d, 12.4)) == 10.0);
  CHECK(std::get<double>(snap(d, 150.0)) == 100.0);
  CHECK(std::get<double>(snap(d, -3.0)) == 0.0);
  CHECK(nearest_selectable(grid, 12.5) == 15.0);
  CHECK(std::get<double>(snap(d, 12.5)) == 15.0);
}

TEST_CASE("snap errors on kind mismatch and unknown choice") {
  const ParamDescriptor d = real_param(0, 100, 1.0);
  CHECK_THROWS_AS(snap(d, true), ParamError);
  CHECK_THROWS_AS(snap(d, std::string("x")), ParamError);
  CHECK_THROWS_AS(snap(d, NAN), ParamError);

  ParamDescriptor c;
  c.id = "style";
  c.kind = ParamKind::choice;
  c.choices = {"a", "b"};
  c.value = std::string("a");
  c = make_descriptor(c);
  CHECK(std::get<std::string>(snap(c, std::string("b"))) == "b");
  try {
    snap(c, std::string("z"));
    FAIL("expected unknown choice");
  } catch (const ParamError& e) {
    CHECK(e.code() == ParamErrorCode::unknown_choice);
  }
  CHECK_THROWS_AS(snap(c, 1.0), ParamError);

  ParamDescriptor b;
  b.id = "on";
  b.kind = ParamKind::boolean;
  b.value = true;
  b = make_descriptor(b);
  CHECK(std::get<bool>(snap(b, false)) == false);
  CHECK_THROWS_AS(snap(b, 1.0), ParamError);
}

TEST_CASE("snap is idempotent and optimal against brute force") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lo(-500, 500);
  std::uniform_real_distribution<double> span(0.01, 2000);
  for (int i = 0; i < 300; ++i) {
    const double min = lo(rng), max = min + span(rng);
    const ParamDescriptor d = real_param(min, max, rng() % 2 ? std::optional<double>{} : (max - min) / 97.0);
    const auto grid = enumerate_grid(min, max, *d.quantized_step);
    std::uniform_real_distribution<double> x(min - 0.2 * (max - min), max + 0.2 * (max - min));
    for (int j = 0; j < 50; ++j) {
      const double raw = x(rng);
      const double s = std::get<double>(snap(d, raw));
      CHECK(std::get<double>(snap(d, s)) == s);
      const double clamped = std::clamp(raw, min, max);
      const double best = nearest_selectable(grid, clamped);
      CHECK(std::abs(clamped - s) <= std::abs(clamped - best) + 1e-9 * std::max(1.0, std::abs(max)));
    }
    // Exact midpoints between neighbours go up.
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      const double mid = 0.5 * (grid[k] + grid[k + 1]);
      CHECK(std::get<double>(snap(d, mid)) == doctest::Approx(grid[k + 1]).epsilon(1e-12));
    }
  }
}

TEST_CASE("integer descriptors stay whole") {
  ParamDescriptor d;
  d.id = "n";
  d.kind = ParamKind::integer;
  d.min = 2;
  d.max = 40;
  d.value = 12.0;
  d = make_descriptor(d);
  CHECK(d.native_step == 1.0);
  CHECK(d.quantized_step == 2.0);
  CHECK(std::get<double>(snap(d, 7.2)) == 8.0);
  for (double v : selectable_values(d)) CHECK(std::floor(v) == v);
  d.min = 2.5;
  CHECK_THROWS_AS(make_descriptor(d), ParamError);
}

TEST_CASE("make_descriptor validates seeds") {
  ParamDescriptor d;
  d.id = "x";
  d.kind = ParamKind::real;
  d.min = 5;
  d.max = 1;
  CHECK_THROWS_AS(make_descriptor(d), ParamError);
  d.min.reset();
  CHECK_THROWS_AS(make_descriptor(d), ParamError);

  ParamDescriptor b;
  b.id = "b";
  b.kind = ParamKind::boolean;
  b.value = true;
  b.min = 0;
  CHECK_THROWS_AS(make_descriptor(b), ParamError);

  ParamDescriptor c;
  c.id = "c";
  c.kind = ParamKind::choice;
  c.value = std::string("a");
  CHECK_THROWS_AS(make_descriptor(c), ParamError);  // no choices
  c.choices = {"a", "a"};
  CHECK_THROWS_AS(make_descriptor(c), ParamError);
}

TEST_CASE("descriptor JSON round trip keeps every announced field") {
  const auto descriptors = announce(load_graph(test_paths::definition("twist_tower.json")));
  for (const ParamDescriptor& d : descriptors) {
    const auto j = descriptor_to_json(d);
    CHECK_FALSE(j.contains("revision"));
    CHECK(descriptor_from_json(j, false) == d);
  }
}

// --- graph -----------------------------------------------------------------

namespace {

GraphDefinition single_box(double w, double h, double d) {
  GraphDefinition g;
  g.name = "box";
  g.nodes.push_back({"b", Op::box, {{"w", InputRef::number(w)}, {"h", InputRef::number(h)}, {"d", InputRef::number(d)}}});
  g.outputs.push_back({"b", 0, false});
  return g;
}

}  // namespace

TEST_CASE("evaluating a single box node") {
  const auto meshes = evaluate(single_box(2, 3, 4), {});
  REQUIRE(meshes.size() == 1);
  const auto& m = meshes.at(0);
  CHECK(m.vertex_count() == 8);
  CHECK(m.triangle_count() == 12);
  const auto b = parasync::geometry::bounds(m);
  CHECK(b.min == std::array<double, 3>{0, 0, 0});
  CHECK(b.max == std::array<double, 3>{2, 3, 4});
}

TEST_CASE("twist by zero in a graph leaves the box untouched") {
  GraphDefinition g = single_box(2, 3, 4);
  g.nodes.push_back({"t", Op::twist, {{"mesh", InputRef::node("b")}, {"degrees", InputRef::number(0)}}});
  g.outputs = {{"t", 0, false}};
  const auto twisted = evaluate(g, {});
  CHECK(parasync::geometry::bitwise_equal(twisted.at(0), evaluate(single_box(2, 3, 4), {}).at(0)));
}

TEST_CASE("division by zero names the div node") {
  GraphDefinition g;
  g.nodes.push_back({"six", Op::constant, {{"value", InputRef::number(6)}}});
  g.nodes.push_back({"zero", Op::constant, {{"value", InputRef::number(0)}}});
  g.nodes.push_back({"ratio", Op::div, {{"a", InputRef::node("six")}, {"b", InputRef::node("zero")}}});
  try {
    evaluate(g, {});
    FAIL("expected division by zero");
  } catch (const GraphError& e) {
    CHECK(e.code() == GraphErrorCode::division_by_zero);
    CHECK(e.subject() == "ratio");
  }
}

TEST_CASE("non-finite intermediates and bad geometry are reported with the node") {
  GraphDefinition g;
  g.nodes.push_back({"big", Op::constant, {{"value", InputRef::number(1e308)}}});
  g.nodes.push_back({"huge", Op::mul, {{"a", InputRef::node("big")}, {"b", InputRef::number(10)}}});
  try {
    evaluate(g, {});
    FAIL("expected non-finite");
  } catch (const GraphError& e) {
    CHECK(e.code() == GraphErrorCode::non_finite);
    CHECK(e.subject() == "huge");
  }
  try {
    evaluate(single_box(0, 1, 1), {});
    FAIL("expected geometry error");
  } catch (const GraphError& e) {
    CHECK(e.code() == GraphErrorCode::geometry);
    CHECK(e.subject() == "b");
  }
}

TEST_CASE("validation catches arity and kind errors") {
  GraphDefinition g = single_box(1, 1, 1);
  g.nodes[0].inputs.pop_back();
  CHECK_THROWS_AS(validate(g), GraphError);

  g = single_box(1, 1, 1);
  g.nodes.push_back({"t", Op::twist, {{"mesh", InputRef::number(3)}, {"degrees", InputRef::number(0)}}});
  try {
    validate(g);
    FAIL("expected kind mismatch");
  } catch (const GraphError& e) {
    CHECK(e.code() == GraphErrorCode::kind_mismatch);
    CHECK(e.subject() == "t");
  }

  g = single_box(1, 1, 1);
  g.nodes.push_back({"s", Op::add, {{"a", InputRef::node("b")}, {"b", InputRef::number(1)}}});
  CHECK_THROWS_AS(validate(g), GraphError);

  g = single_box(1, 1, 1);
  g.nodes[0].inputs.push_back({"w", InputRef::number(2)});
  CHECK_THROWS_AS(validate(g), GraphError);

  g = single_box(1, 1, 1);
  g.nodes.push_back({"b", Op::constant, {{"value", InputRef::number(1)}}});
  CHECK_THROWS_AS(validate(g), GraphError);

  g = single_box(1, 1, 1);
  g.outputs.push_back({"b", 0, false});
  CHECK_THROWS_AS(validate(g), GraphError);

  g = single_box(1, 1, 1);
  g.nodes[0].inputs[0].ref = InputRef::param("nope");
  try {
    validate(g);
    FAIL("expected unknown reference");
  } catch (const GraphError& e) {
    CHECK(e.code() == GraphErrorCode::unknown_reference);
  }
}

TEST_CASE("acyclicity check rejects every randomly generated cyclic graph") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    GraphDefinition g;
    // DAG of add nodes: node i reads from a random earlier node (or a literal).
    for (int i = 0; i < n; ++i) {
      const InputRef a = i == 0 ? InputRef::number(1) : InputRef::node("n" + std::to_string(rng() % i));
      g.nodes.push_back({"n" + std::to_string(i), Op::add, {{"a", a}, {"b", InputRef::number(1)}}});
    }
    CHECK_NOTHROW(validate(g));
    // Close a cycle: pick j < k along an existing dependency chain and point j at k.
    const int k = 1 + static_cast<int>(rng() % (n - 1));
    int j = k;
    while (j > 0 && rng() % 3 != 0) {
      const auto& ref = g.nodes[j].inputs[0].ref;
      if (ref.source != InputRef::Source::node) break;
      j = std::stoi(ref.target.substr(1));
    }
    g.nodes[j].inputs[1].ref = InputRef::node("n" + std::to_string(k));
    try {
      validate(g);
      FAIL("cycle not detected");
    } catch (const GraphError& e) {
      CHECK(e.code() == GraphErrorCode::cycle);
    }
  }
}

TEST_CASE("evaluation is deterministic") {
  const GraphDefinition g = load_graph(test_paths::definition("twist_tower.json"));
  const auto b = bindings_of(announce(g));
  const auto first = evaluate(g, b);
  const auto second = evaluate(g, b);
  REQUIRE(first.size() == 2);
  for (const auto& [id, mesh] : first) CHECK(parasync::geometry::bitwise_equal(mesh, second.at(id)));
}

TEST_CASE("twist tower outputs are valid and respond to parameters") {
  const GraphDefinition g = load_graph(test_paths::definition("twist_tower.json"));
  auto descriptors = announce(g);
  auto b = bindings_of(descriptors);
  const auto meshes = evaluate(g, b);
  const auto& tower = meshes.at(0);
  CHECK(tower.vertex_count() == 8 * 12);
  CHECK(parasync::geometry::is_valid(tower));
  CHECK(meshes.at(1).vertex_count() == 2 * 16 + 2);  // "medium" -> 16 segments
  b["core_detail"] = std::string("fine");
  CHECK(evaluate(g, b).at(1).vertex_count() == 2 * 24 + 2);
  b["height"] = 10.0;
  CHECK_FALSE(parasync::geometry::bitwise_equal(evaluate(g, b).at(0), tower));
}

TEST_CASE("missing or mismatched bindings are errors") {
  const GraphDefinition g = load_graph(test_paths::definition("minimal_box.json"));
  auto b = bindings_of(announce(g));
  b.erase("w");
  CHECK_THROWS_AS(evaluate(g, b), GraphError);
  b = bindings_of(announce(g));
  b["w"] = true;
  CHECK_THROWS_AS(evaluate(g, b), GraphError);
}

TEST_CASE("announce fills quantized steps in definition order") {
  GraphDefinition g;
  CHECK(announce(g).empty());

  ParamDescriptor r;
  r.id = "h";
  r.kind = ParamKind::real;
  r.min = 0;
  r.max = 100;
  r.native_step = 1;
  r.value = 50.0;
  ParamDescriptor b;
  b.id = "flag";
  b.kind = ParamKind::boolean;
  b.value = false;
  g.params = {r, b};
  const auto out = announce(g);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "h");
  CHECK(out[0].quantized_step == 5.0);
  CHECK(out[0].revision == 0);
  CHECK(out[1].kind == ParamKind::boolean);
  CHECK_FALSE(out[1].min.has_value());
  CHECK_FALSE(out[1].max.has_value());
  CHECK_FALSE(out[1].quantized_step.has_value());

  g.params[0].native_step = -1;
  try {
    announce(g);
    FAIL("expected error");
  } catch (const GraphError& e) {
    CHECK(e.subject() == "h");
  }
}

TEST_CASE("definition files parse and survive a dump/parse cycle") {
  for (const char* name : {"minimal_box.json", "twist_tower.json"}) {
    const GraphDefinition g = load_graph(test_paths::definition(name));
    CHECK(parse_graph(dump_graph(g)) == g);
  }
  CHECK_THROWS_AS(load_graph("/nonexistent/definition.json"), std::runtime_error);
  CHECK_THROWS_AS(parse_graph("{not json"), GraphError);
  CHECK_THROWS_AS(parse_graph(R"({"params":[],"nodes":[{"id":"x","op":"warp"}],"outputs":[]})"), GraphError);
  CHECK_THROWS_AS(parse_graph(R"({"params":[],"nodes":[],"outputs":[{"node":"ghost"}]})"), GraphError);
}
