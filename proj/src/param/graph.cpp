// SPDX-License-Identifier: Apache-2.0
#include "parasync/param/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "parasync/param/json.hpp"

namespace parasync::param {

using nlohmann::json;

namespace {

struct OpName {
  Op op;
  std::string_view name;
};

constexpr OpName kOpNames[] = {
    {Op::constant, "const"},   {Op::add, "add"},
    {Op::sub, "sub"},          {Op::mul, "mul"},
    {Op::div, "div"},          {Op::box, "box"},
    {Op::cylinder, "cylinder"}, {Op::translate, "translate"},
    {Op::rotate_z, "rotate_z"}, {Op::scale, "scale"},
    {Op::linear_array, "linear_array"}, {Op::twist, "twist"},
    {Op::merge, "merge"},
};

}  // namespace

std::string_view to_string(Op op) {
  for (const auto& e : kOpNames) {
    if (e.op == op) return e.name;
  }
  return "unknown";
}

std::optional<Op> parse_op(std::string_view text) {
  for (const auto& e : kOpNames) {
    if (e.name == text) return e.op;
  }
  return std::nullopt;
}

std::string_view to_string(GraphErrorCode code) {
  switch (code) {
    case GraphErrorCode::parse: return "parse";
    case GraphErrorCode::invalid_param: return "invalid_param";
    case GraphErrorCode::duplicate_id: return "duplicate_id";
    case GraphErrorCode::unknown_op: return "unknown_op";
    case GraphErrorCode::unknown_reference: return "unknown_reference";
    case GraphErrorCode::arity: return "arity";
    case GraphErrorCode::kind_mismatch: return "kind_mismatch";
    case GraphErrorCode::cycle: return "cycle";
    case GraphErrorCode::bad_output: return "bad_output";
    case GraphErrorCode::missing_binding: return "missing_binding";
    case GraphErrorCode::division_by_zero: return "division_by_zero";
    case GraphErrorCode::non_finite: return "non_finite";
    case GraphErrorCode::geometry: return "geometry";
  }
  return "unknown";
}

GraphError::GraphError(GraphErrorCode code, std::string subject, const std::string& message)
    : std::runtime_error(subject.empty() ? message : "'" + subject + "': " + message),
      code_(code),
      subject_(std::move(subject)) {}

const Signature& signature(Op op) {
  using K = ValueKind;
  static const std::map<Op, Signature> table = {
      {Op::constant, {K::number, {{"value", K::number}}}},
      {Op::add, {K::number, {{"a", K::number}, {"b", K::number}}}},
      {Op::sub, {K::number, {{"a", K::number}, {"b", K::number}}}},
      {Op::mul, {K::number, {{"a", K::number}, {"b", K::number}}}},
      {Op::div, {K::number, {{"a", K::number}, {"b", K::number}}}},
      {Op::box, {K::mesh, {{"w", K::number}, {"h", K::number}, {"d", K::number}}}},
      {Op::cylinder, {K::mesh, {{"radius", K::number}, {"height", K::number}, {"segments", K::number}}}},
      {Op::translate, {K::mesh, {{"mesh", K::mesh}, {"dx", K::number}, {"dy", K::number}, {"dz", K::number}}}},
      {Op::rotate_z, {K::mesh, {{"mesh", K::mesh}, {"degrees", K::number}}}},
      {Op::scale, {K::mesh, {{"mesh", K::mesh}, {"sx", K::number}, {"sy", K::number}, {"sz", K::number}}}},
      {Op::linear_array,
       {K::mesh, {{"mesh", K::mesh}, {"count", K::number}, {"dx", K::number}, {"dy", K::number}, {"dz", K::number}}}},
      {Op::twist, {K::mesh, {{"mesh", K::mesh}, {"degrees", K::number}}}},
      {Op::merge, {K::mesh, {{"meshes", K::mesh}}, true}},
  };
  return table.at(op);
}

std::vector<std::size_t> validate(const GraphDefinition& graph) {
  std::set<std::string> param_ids;
  for (const ParamDescriptor& p : graph.params) {
    if (!param_ids.insert(p.id).second) {
      throw GraphError(GraphErrorCode::duplicate_id, p.id, "duplicate parameter id");
    }
    try {
      make_descriptor(p);
    } catch (const ParamError& e) {
      throw GraphError(GraphErrorCode::invalid_param, p.id, e.what());
    }
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].id.empty()) throw GraphError(GraphErrorCode::parse, {}, "node id must not be empty");
    if (!index.emplace(graph.nodes[i].id, i).second) {
      throw GraphError(GraphErrorCode::duplicate_id, graph.nodes[i].id, "duplicate node id");
    }
  }

  std::vector<std::vector<std::size_t>> dependents(graph.nodes.size());
  std::vector<std::size_t> pending(graph.nodes.size(), 0);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const Node& node = graph.nodes[i];
    const Signature& sig = signature(node.op);
    std::map<std::string_view, int> seen;
    for (const NamedInput& in : node.inputs) {
      const auto slot = std::find_if(sig.slots.begin(), sig.slots.end(),
                                     [&](const auto& s) { return s.first == in.name; });
      if (slot == sig.slots.end()) {
        throw GraphError(GraphErrorCode::arity, node.id,
                         "unexpected input '" + in.name + "' for op " + std::string(to_string(node.op)));
      }
      if (++seen[slot->first] > 1 && !sig.variadic) {
        throw GraphError(GraphErrorCode::arity, node.id, "input '" + in.name + "' given more than once");
      }
      ValueKind source_kind = ValueKind::number;
      switch (in.ref.source) {
        case InputRef::Source::literal:
          if (!std::isfinite(in.ref.literal)) {
            throw GraphError(GraphErrorCode::non_finite, node.id, "literal for '" + in.name + "' is not finite");
          }
          break;
        case InputRef::Source::param:
          if (!param_ids.contains(in.ref.target)) {
            throw GraphError(GraphErrorCode::unknown_reference, node.id,
                             "input '" + in.name + "' references unknown param '" + in.ref.target + "'");
          }
          break;
        case InputRef::Source::node: {
          const auto it = index.find(in.ref.target);
          if (it == index.end()) {
            throw GraphError(GraphErrorCode::unknown_reference, node.id,
                             "input '" + in.name + "' references unknown node '" + in.ref.target + "'");
          }
          source_kind = signature(graph.nodes[it->second].op).result;
          dependents[it->second].push_back(i);
          ++pending[i];
          break;
        }
      }
      if (source_kind != slot->second) {
        throw GraphError(GraphErrorCode::kind_mismatch, node.id,
                         "input '" + in.name + "' expects a " +
                             (slot->second == ValueKind::mesh ? "mesh" : "number"));
      }
    }
    if (!sig.variadic) {
      for (const auto& s : sig.slots) {
        if (!seen.contains(s.first)) {
          throw GraphError(GraphErrorCode::arity, node.id, "missing input '" + std::string(s.first) + "'");
        }
      }
    }
  }

  // Kahn's algorithm; the min-heap keeps definition order among ready nodes.
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(graph.nodes.size());
  while (!ready.empty()) {
    const std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t d : dependents[i]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }
  if (order.size() != graph.nodes.size()) {
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i] > 0) throw GraphError(GraphErrorCode::cycle, graph.nodes[i].id, "node is part of a cycle");
    }
  }

  std::set<std::uint32_t> model_ids;
  for (const OutputSpec& out : graph.outputs) {
    const auto it = index.find(out.node);
    if (it == index.end()) throw GraphError(GraphErrorCode::bad_output, out.node, "output references unknown node");
    if (signature(graph.nodes[it->second].op).result != ValueKind::mesh) {
      throw GraphError(GraphErrorCode::bad_output, out.node, "output node does not produce a mesh");
    }
    if (!model_ids.insert(out.model_id).second) {
      throw GraphError(GraphErrorCode::bad_output, out.node,
                       "model_id " + std::to_string(out.model_id) + " used twice");
    }
  }
  return order;
}

namespace {

InputRef parse_ref(const json& j, const std::string& node_id, const std::string& slot) {
  if (j.is_number()) return InputRef::number(j.get<double>());
  if (j.is_object() && j.size() == 1) {
    if (const auto it = j.find("param"); it != j.end() && it->is_string()) return InputRef::param(it->get<std::string>());
    if (const auto it = j.find("node"); it != j.end() && it->is_string()) return InputRef::node(it->get<std::string>());
  }
  throw GraphError(GraphErrorCode::parse, node_id,
                   "input '" + slot + "' must be a number, {\"param\": id} or {\"node\": id}");
}

json ref_to_json(const InputRef& ref) {
  switch (ref.source) {
    case InputRef::Source::literal: return ref.literal;
    case InputRef::Source::param: return json{{"param", ref.target}};
    case InputRef::Source::node: return json{{"node", ref.target}};
  }
  return nullptr;
}

Node parse_node(const json& j) {
  if (!j.is_object()) throw GraphError(GraphErrorCode::parse, {}, "each node must be an object");
  Node node;
  const auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw GraphError(GraphErrorCode::parse, {}, "node without a string 'id'");
  node.id = id->get<std::string>();
  const auto op = j.find("op");
  if (op == j.end() || !op->is_string()) throw GraphError(GraphErrorCode::parse, node.id, "node without a string 'op'");
  const auto parsed = parse_op(op->get<std::string>());
  if (!parsed) throw GraphError(GraphErrorCode::unknown_op, node.id, "unknown op '" + op->get<std::string>() + "'");
  node.op = *parsed;
  const auto inputs = j.find("inputs");
  if (inputs == j.end()) return node;
  if (!inputs->is_object()) throw GraphError(GraphErrorCode::parse, node.id, "'inputs' must be an object");
  for (const auto& [name, value] : inputs->items()) {
    if (value.is_array()) {
      for (const json& item : value) node.inputs.push_back({name, parse_ref(item, node.id, name)});
    } else {
      node.inputs.push_back({name, parse_ref(value, node.id, name)});
    }
  }
  return node;
}

}  // namespace

GraphDefinition parse_graph(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw GraphError(GraphErrorCode::parse, {}, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw GraphError(GraphErrorCode::parse, {}, "definition must be a JSON object");

  GraphDefinition graph;
  if (const auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw GraphError(GraphErrorCode::parse, {}, "'name' must be a string");
    graph.name = it->get<std::string>();
  }
  auto array_at = [&](const char* key) -> const json& {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) {
      throw GraphError(GraphErrorCode::parse, {}, std::string("'") + key + "' must be an array");
    }
    return *it;
  };
  for (const json& p : array_at("params")) {
    try {
      graph.params.push_back(descriptor_from_json(p, true));
    } catch (const FieldError& e) {
      const std::string id = p.is_object() && p.contains("id") && p["id"].is_string() ? p["id"].get<std::string>() : "";
      throw GraphError(GraphErrorCode::parse, id, e.what());
    }
  }
  for (const json& n : array_at("nodes")) graph.nodes.push_back(parse_node(n));
  for (const json& o : array_at("outputs")) {
    if (!o.is_object() || !o.contains("node") || !o["node"].is_string()) {
      throw GraphError(GraphErrorCode::parse, {}, "each output needs a string 'node'");
    }
    OutputSpec out;
    out.node = o["node"].get<std::string>();
    if (const auto it = o.find("model_id"); it != o.end()) {
      if (!it->is_number_unsigned() || it->get<std::uint64_t>() > 0xffffffffu) {
        throw GraphError(GraphErrorCode::parse, out.node, "'model_id' must be an unsigned 32-bit integer");
      }
      out.model_id = it->get<std::uint32_t>();
    } else {
      out.model_id = static_cast<std::uint32_t>(graph.outputs.size());
    }
    if (const auto it = o.find("normals"); it != o.end()) {
      if (!it->is_boolean()) throw GraphError(GraphErrorCode::parse, out.node, "'normals' must be a boolean");
      out.normals = it->get<bool>();
    }
    graph.outputs.push_back(std::move(out));
  }
  validate(graph);
  return graph;
}

GraphDefinition load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open definition file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_graph(text.str());
}

std::string dump_graph(const GraphDefinition& graph) {
  json doc;
  doc["name"] = graph.name;
  doc["params"] = json::array();
  for (const ParamDescriptor& p : graph.params) {
    json j = descriptor_to_json(p);
    j.erase("quantized_step");
    doc["params"].push_back(std::move(j));
  }
  doc["nodes"] = json::array();
  for (const Node& node : graph.nodes) {
    json inputs = json::object();
    for (const NamedInput& in : node.inputs) {
      if (signature(node.op).variadic) {
        inputs[in.name].push_back(ref_to_json(in.ref));
      } else {
        inputs[in.name] = ref_to_json(in.ref);
      }
    }
    if (node.op == Op::merge && inputs.empty()) inputs["meshes"] = json::array();
    doc["nodes"].push_back({{"id", node.id}, {"op", std::string(to_string(node.op))}, {"inputs", inputs}});
  }
  doc["outputs"] = json::array();
  for (const OutputSpec& out : graph.outputs) {
    doc["outputs"].push_back({{"node", out.node}, {"model_id", out.model_id}, {"normals", out.normals}});
  }
  return doc.dump(2);
}

}  // namespace parasync::param
