// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "parasync/geometry/mesh.hpp"

namespace parasync::geometry {

/// Closed box spanning [0,w]×[0,h]×[0,d]: 8 vertices, 12 triangles.
Mesh make_box(double w, double h, double d);

/// Closed capped cylinder around the z axis from z = 0 to z = height:
/// 2·segments rim vertices plus two cap centers, 4·segments triangles.
Mesh make_cylinder(double radius, double height, int segments);

}  // namespace parasync::geometry
