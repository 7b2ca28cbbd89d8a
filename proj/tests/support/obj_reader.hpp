// SPDX-License-Identifier: Apache-2.0
// Minimal Wavefront OBJ reader kept in test code as the export oracle:
// `v x y z` and `f a b c` with 1-based indices, everything else ignored.
#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

#include "parasync/geometry/mesh.hpp"

namespace oracle {

inline parasync::geometry::Mesh parse_obj(const std::string& text) {
  parasync::geometry::Mesh m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      float x, y, z;
      if (!(ls >> x >> y >> z)) throw std::runtime_error("bad v line: " + line);
      m.positions.insert(m.positions.end(), {x, y, z});
    } else if (tag == "f") {
      long a, b, c;
      if (!(ls >> a >> b >> c) || a < 1 || b < 1 || c < 1) throw std::runtime_error("bad f line: " + line);
      m.triangles.insert(m.triangles.end(), {std::uint32_t(a - 1), std::uint32_t(b - 1), std::uint32_t(c - 1)});
    }
  }
  return m;
}

}  // namespace oracle
