// SPDX-License-Identifier: Apache-2.0
#include "parasync/geometry/primitives.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace parasync::geometry {

namespace {

constexpr int kMaxSegments = 1 << 16;

void require_dimension(double value, const char* what) {
  if (!std::isfinite(value) || !(value > 0.0) ||
      value > static_cast<double>(std::numeric_limits<float>::max())) {
    throw GeometryError(std::string(what) + " must be positive and finite, got " + std::to_string(value));
  }
}

}  // namespace

Mesh make_box(double w, double h, double d) {
  require_dimension(w, "box width");
  require_dimension(h, "box height");
  require_dimension(d, "box depth");
  const auto x = static_cast<float>(w), y = static_cast<float>(h), z = static_cast<float>(d);
  Mesh m;
  m.positions = {
      0, 0, 0,  x, 0, 0,  x, y, 0,  0, y, 0,  // bottom ring, z = 0
      0, 0, z,  x, 0, z,  x, y, z,  0, y, z,  // top ring, z = d
  };
  m.triangles = {
      0, 2, 1,  0, 3, 2,  // -z
      4, 5, 6,  4, 6, 7,  // +z
      0, 1, 5,  0, 5, 4,  // -y
      3, 7, 6,  3, 6, 2,  // +y
      0, 4, 7,  0, 7, 3,  // -x
      1, 2, 6,  1, 6, 5,  // +x
  };
  return m;
}

Mesh make_cylinder(double radius, double height, int segments) {
  require_dimension(radius, "cylinder radius");
  require_dimension(height, "cylinder height");
  if (segments < 3 || segments > kMaxSegments) {
    throw GeometryError("cylinder segments must be in [3, " + std::to_string(kMaxSegments) + "], got " +
                        std::to_string(segments));
  }
  const auto s = static_cast<std::uint32_t>(segments);
  Mesh m;
  m.positions.resize(3 * (2 * s + 2));
  for (std::uint32_t i = 0; i < s; ++i) {
    const double a = 2.0 * std::numbers::pi * i / s;
    const auto cx = static_cast<float>(radius * std::cos(a));
    const auto cy = static_cast<float>(radius * std::sin(a));
    float* bottom = &m.positions[3 * i];
    float* top = &m.positions[3 * (s + i)];
    bottom[0] = top[0] = cx;
    bottom[1] = top[1] = cy;
    bottom[2] = 0.0f;
    top[2] = static_cast<float>(height);
  }
  const std::uint32_t bottom_center = 2 * s;
  const std::uint32_t top_center = 2 * s + 1;
  m.positions[3 * top_center + 2] = static_cast<float>(height);

  m.triangles.reserve(12 * s);
  for (std::uint32_t i = 0; i < s; ++i) {
    const std::uint32_t j = (i + 1) % s;
    const std::uint32_t bi = i, bj = j, ti = s + i, tj = s + j;
    m.triangles.insert(m.triangles.end(), {bi, bj, tj, bi, tj, ti});
    m.triangles.insert(m.triangles.end(), {bottom_center, bj, bi});
    m.triangles.insert(m.triangles.end(), {top_center, ti, tj});
  }
  return m;
}

}  // namespace parasync::geometry
