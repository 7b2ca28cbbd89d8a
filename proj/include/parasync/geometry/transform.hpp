// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "parasync/geometry/mesh.hpp"

namespace parasync::geometry {

Mesh translate(Mesh mesh, double dx, double dy, double dz);
Mesh rotate_z(Mesh mesh, double degrees);

/// Nonzero factors only. A mirroring scale (negative product) flips the
/// triangle winding so faces keep pointing outward.
Mesh scale(Mesh mesh, double sx, double sy, double sz);

/// Rotates each vertex about the z axis by degrees·(z − z_min)/(z_max − z_min).
/// A flat mesh is returned unchanged. Normals, if present, are recomputed.
Mesh twist(Mesh mesh, double degrees);

/// `count` copies, the k-th offset by k·(dx, dy, dz).
Mesh linear_array(const Mesh& mesh, int count, double dx, double dy, double dz);

/// Concatenation with index rebasing. Normals survive only when every
/// non-empty input carries them.
Mesh merge(std::span<const Mesh> meshes);

}  // namespace parasync::geometry
