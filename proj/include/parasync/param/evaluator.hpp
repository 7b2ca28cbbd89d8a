// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "parasync/geometry/mesh.hpp"
#include "parasync/param/descriptor.hpp"
#include "parasync/param/graph.hpp"

namespace parasync::param {

using Bindings = std::map<std::string, ParamValue>;
using Value = std::variant<double, geometry::Mesh>;
using ModelMeshes = std::map<std::uint32_t, geometry::Mesh>;

/// One descriptor per parameter seed, in definition order, quantized and at
/// revision 0.
std::vector<ParamDescriptor> announce(const GraphDefinition& graph);

/// Current value of every descriptor, keyed by id.
Bindings bindings_of(const std::vector<ParamDescriptor>& descriptors);

/// Evaluates the graph in topological order and returns each output's mesh
/// under its model id. Deterministic: equal inputs give bit-identical
/// meshes. Failures throw GraphError naming the node (or param).
ModelMeshes evaluate(const GraphDefinition& graph, const Bindings& bindings);

}  // namespace parasync::param
