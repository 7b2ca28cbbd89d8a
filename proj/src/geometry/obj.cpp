// SPDX-License-Identifier: Apache-2.0
#include "parasync/geometry/obj.hpp"

#include <cstdio>

namespace parasync::geometry {

std::string export_obj(const Mesh& mesh) {
  validate(mesh);
  std::string out = "# parasync mesh: " + std::to_string(mesh.vertex_count()) + " vertices, " +
                    std::to_string(mesh.triangle_count()) + " triangles\n";
  char line[160];
  for (std::size_t i = 0; i < mesh.positions.size(); i += 3) {
    const int n = std::snprintf(line, sizeof line, "v %.6f %.6f %.6f\n", mesh.positions[i],
                                mesh.positions[i + 1], mesh.positions[i + 2]);
    out.append(line, static_cast<std::size_t>(n));
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); t += 3) {
    const int n = std::snprintf(line, sizeof line, "f %u %u %u\n", mesh.triangles[t] + 1,
                                mesh.triangles[t + 1] + 1, mesh.triangles[t + 2] + 1);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace parasync::geometry
