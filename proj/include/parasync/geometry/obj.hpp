// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "parasync/geometry/mesh.hpp"

namespace parasync::geometry {

/// Wavefront OBJ text: a header comment, `v x y z` lines, then `f a b c`
/// lines with 1-based indices. Coordinates carry six fractional digits.
std::string export_obj(const Mesh& mesh);

}  // namespace parasync::geometry
