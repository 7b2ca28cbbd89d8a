// SPDX-License-Identifier: Apache-2.0
#include "parasync/param/evaluator.hpp"

#include <cmath>
#include <limits>

#include "parasync/geometry/primitives.hpp"
#include "parasync/geometry/transform.hpp"

namespace parasync::param {

std::vector<ParamDescriptor> announce(const GraphDefinition& graph) {
  std::vector<ParamDescriptor> out;
  out.reserve(graph.params.size());
  for (const ParamDescriptor& seed : graph.params) {
    try {
      out.push_back(make_descriptor(seed));
    } catch (const ParamError& e) {
      throw GraphError(GraphErrorCode::invalid_param, seed.id, e.what());
    }
  }
  return out;
}

Bindings bindings_of(const std::vector<ParamDescriptor>& descriptors) {
  Bindings b;
  for (const ParamDescriptor& d : descriptors) b.emplace(d.id, d.value);
  return b;
}

namespace {

class Evaluation {
 public:
  Evaluation(const GraphDefinition& graph, const Bindings& bindings)
      : graph_(graph), order_(validate(graph)) {
    const auto descriptors = announce(graph);
    for (const ParamDescriptor& d : descriptors) {
      const auto it = bindings.find(d.id);
      if (it == bindings.end()) throw GraphError(GraphErrorCode::missing_binding, d.id, "no value bound");
      try {
        params_.emplace(d.id, as_number(d, it->second));
      } catch (const ParamError& e) {
        throw GraphError(GraphErrorCode::kind_mismatch, d.id, e.what());
      }
    }
  }

  ModelMeshes run() {
    for (std::size_t i = 0; i < graph_.nodes.size(); ++i) index_.emplace(graph_.nodes[i].id, i);
    values_.resize(graph_.nodes.size());
    for (std::size_t i : order_) {
      const Node& node = graph_.nodes[i];
      try {
        values_[i] = compute(node);
      } catch (const geometry::GeometryError& e) {
        throw GraphError(GraphErrorCode::geometry, node.id, e.what());
      }
    }
    ModelMeshes meshes;
    for (const OutputSpec& out : graph_.outputs) {
      geometry::Mesh mesh = std::get<geometry::Mesh>(values_[index_.at(out.node)]);
      if (out.normals) mesh = geometry::with_normals(std::move(mesh));
      meshes.emplace(out.model_id, std::move(mesh));
    }
    return meshes;
  }

 private:
  const NamedInput& slot(const Node& node, std::string_view name) const {
    for (const NamedInput& in : node.inputs) {
      if (in.name == name) return in;
    }
    throw GraphError(GraphErrorCode::arity, node.id, "missing input '" + std::string(name) + "'");
  }

  double number(const Node& node, std::string_view name) const {
    const InputRef& ref = slot(node, name).ref;
    switch (ref.source) {
      case InputRef::Source::literal: return ref.literal;
      case InputRef::Source::param: return params_.at(ref.target);
      case InputRef::Source::node: return std::get<double>(values_[index_.at(ref.target)]);
    }
    return 0.0;
  }

  const geometry::Mesh& mesh_of(const InputRef& ref) const {
    return std::get<geometry::Mesh>(values_[index_.at(ref.target)]);
  }

  const geometry::Mesh& mesh(const Node& node, std::string_view name) const { return mesh_of(slot(node, name).ref); }

  static int whole(const Node& node, std::string_view name, double v) {
    if (!std::isfinite(v) || std::floor(v) != v || std::abs(v) > std::numeric_limits<int>::max()) {
      throw GraphError(GraphErrorCode::kind_mismatch, node.id,
                       "input '" + std::string(name) + "' must be a whole number, got " + std::to_string(v));
    }
    return static_cast<int>(v);
  }

  static double checked(const Node& node, double v) {
    if (!std::isfinite(v)) throw GraphError(GraphErrorCode::non_finite, node.id, "result is not finite");
    return v;
  }

  Value compute(const Node& node) const {
    using namespace geometry;
    auto n = [&](std::string_view name) {
      const double v = number(node, name);
      if (!std::isfinite(v)) {
        throw GraphError(GraphErrorCode::non_finite, node.id, "input '" + std::string(name) + "' is not finite");
      }
      return v;
    };
    switch (node.op) {
      case Op::constant: return n("value");
      case Op::add: return checked(node, n("a") + n("b"));
      case Op::sub: return checked(node, n("a") - n("b"));
      case Op::mul: return checked(node, n("a") * n("b"));
      case Op::div: {
        const double b = n("b");
        if (b == 0.0) throw GraphError(GraphErrorCode::division_by_zero, node.id, "division by zero");
        return checked(node, n("a") / b);
      }
      case Op::box: return make_box(n("w"), n("h"), n("d"));
      case Op::cylinder:
        return make_cylinder(n("radius"), n("height"), whole(node, "segments", n("segments")));
      case Op::translate: return translate(mesh(node, "mesh"), n("dx"), n("dy"), n("dz"));
      case Op::rotate_z: return rotate_z(mesh(node, "mesh"), n("degrees"));
      case Op::scale: return scale(mesh(node, "mesh"), n("sx"), n("sy"), n("sz"));
      case Op::twist: return twist(mesh(node, "mesh"), n("degrees"));
      case Op::linear_array:
        return linear_array(mesh(node, "mesh"), whole(node, "count", n("count")), n("dx"), n("dy"), n("dz"));
      case Op::merge: {
        std::vector<Mesh> parts;
        for (const NamedInput& in : node.inputs) parts.push_back(mesh_of(in.ref));
        return geometry::merge(parts);
      }
    }
    throw GraphError(GraphErrorCode::unknown_op, node.id, "unhandled op");
  }

  const GraphDefinition& graph_;
  std::vector<std::size_t> order_;
  std::map<std::string, double> params_;
  std::map<std::string, std::size_t> index_;
  std::vector<Value> values_;
};

}  // namespace

ModelMeshes evaluate(const GraphDefinition& graph, const Bindings& bindings) {
  return Evaluation(graph, bindings).run();
}

}  // namespace parasync::param
