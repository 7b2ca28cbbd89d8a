// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parasync/param/descriptor.hpp"

namespace parasync::param {

enum class Op {
  constant,
  add,
  sub,
  mul,
  div,
  box,
  cylinder,
  translate,
  rotate_z,
  scale,
  linear_array,
  twist,
  merge,
};

std::string_view to_string(Op op);
std::optional<Op> parse_op(std::string_view text);

/// Where a node input comes from.
struct InputRef {
  enum class Source { literal, param, node };
  Source source = Source::literal;
  double literal = 0.0;
  std::string target;  // param or node id

  static InputRef number(double v) { return {Source::literal, v, {}}; }
  static InputRef param(std::string id) { return {Source::param, 0.0, std::move(id)}; }
  static InputRef node(std::string id) { return {Source::node, 0.0, std::move(id)}; }

  bool operator==(const InputRef&) const = default;
};

/// A named input slot. `merge` repeats the slot name "meshes" once per item.
struct NamedInput {
  std::string name;
  InputRef ref;

  bool operator==(const NamedInput&) const = default;
};

struct Node {
  std::string id;
  Op op = Op::constant;
  std::vector<NamedInput> inputs;

  bool operator==(const Node&) const = default;
};

struct OutputSpec {
  std::string node;
  std::uint32_t model_id = 0;
  bool normals = false;

  bool operator==(const OutputSpec&) const = default;
};

/// The parametric program the host evaluates. `params` holds seeds: the
/// quantized step and revision are filled in by announce().
struct GraphDefinition {
  std::string name;
  std::vector<ParamDescriptor> params;
  std::vector<Node> nodes;
  std::vector<OutputSpec> outputs;

  bool operator==(const GraphDefinition&) const = default;
};

enum class GraphErrorCode {
  parse,
  invalid_param,
  duplicate_id,
  unknown_op,
  unknown_reference,
  arity,
  kind_mismatch,
  cycle,
  bad_output,
  missing_binding,
  division_by_zero,
  non_finite,
  geometry,
};

std::string_view to_string(GraphErrorCode code);

/// Carries the id of the node, param or output the failure is about.
class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrorCode code, std::string subject, const std::string& message);

  GraphErrorCode code() const { return code_; }
  const std::string& subject() const { return subject_; }

 private:
  GraphErrorCode code_;
  std::string subject_;
};

/// Value kind flowing along an edge.
enum class ValueKind { number, mesh };

struct Signature {
  ValueKind result;
  std::vector<std::pair<std::string_view, ValueKind>> slots;
  bool variadic = false;  // merge: any number of mesh slots named "meshes"
};

const Signature& signature(Op op);

/// Checks every structural invariant and returns node indices in a
/// topological order (ties broken by definition order).
std::vector<std::size_t> validate(const GraphDefinition& graph);

GraphDefinition parse_graph(std::string_view json_text);
GraphDefinition load_graph(const std::filesystem::path& path);
std::string dump_graph(const GraphDefinition& graph);

}  // namespace parasync::param
