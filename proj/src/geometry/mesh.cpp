// SPDX-License-Identifier: Apache-2.0
#include "parasync/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace parasync::geometry {

void validate(const Mesh& mesh) {
  if (mesh.positions.size() % 3 != 0) throw GeometryError("positions length is not a multiple of 3");
  if (mesh.triangles.size() % 3 != 0) throw GeometryError("triangles length is not a multiple of 3");
  for (float c : mesh.positions) {
    if (!std::isfinite(c)) throw GeometryError("non-finite vertex coordinate");
  }
  const std::size_t v = mesh.vertex_count();
  for (std::uint32_t i : mesh.triangles) {
    if (i >= v) {
      throw GeometryError("triangle index " + std::to_string(i) + " out of range for " +
                          std::to_string(v) + " vertices");
    }
  }
  if (mesh.has_normals()) {
    if (mesh.normals.size() != mesh.positions.size()) {
      throw GeometryError("normals length differs from positions length");
    }
    for (std::size_t i = 0; i < mesh.normals.size(); i += 3) {
      const double x = mesh.normals[i], y = mesh.normals[i + 1], z = mesh.normals[i + 2];
      const double len = std::sqrt(x * x + y * y + z * z);
      if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-4) {
        throw GeometryError("normal " + std::to_string(i / 3) + " is not unit length");
      }
    }
  }
}

bool is_valid(const Mesh& mesh) {
  try {
    validate(mesh);
    return true;
  } catch (const GeometryError&) {
    return false;
  }
}

Bounds bounds(const Mesh& mesh) {
  Bounds b;
  if (mesh.positions.size() < 3) return b;
  for (int k = 0; k < 3; ++k) b.min[k] = b.max[k] = mesh.positions[k];
  for (std::size_t i = 0; i < mesh.positions.size(); i += 3) {
    for (int k = 0; k < 3; ++k) {
      b.min[k] = std::min<double>(b.min[k], mesh.positions[i + k]);
      b.max[k] = std::max<double>(b.max[k], mesh.positions[i + k]);
    }
  }
  return b;
}

namespace {

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

}  // namespace

bool bitwise_equal(const Mesh& a, const Mesh& b) {
  return same_bits(a.positions, b.positions) && same_bits(a.normals, b.normals) &&
         same_bits(a.triangles, b.triangles);
}

Mesh with_normals(Mesh mesh) {
  const std::size_t v = mesh.vertex_count();
  std::vector<double> acc(3 * v, 0.0);
  const auto& p = mesh.positions;
  for (std::size_t t = 0; t + 2 < mesh.triangles.size(); t += 3) {
    const std::uint32_t ia = mesh.triangles[t], ib = mesh.triangles[t + 1], ic = mesh.triangles[t + 2];
    const double e1[3] = {double(p[3 * ib]) - p[3 * ia], double(p[3 * ib + 1]) - p[3 * ia + 1],
                          double(p[3 * ib + 2]) - p[3 * ia + 2]};
    const double e2[3] = {double(p[3 * ic]) - p[3 * ia], double(p[3 * ic + 1]) - p[3 * ia + 1],
                          double(p[3 * ic + 2]) - p[3 * ia + 2]};
    // Unnormalized cross product: its length is twice the face area.
    const double n[3] = {e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
                         e1[0] * e2[1] - e1[1] * e2[0]};
    for (std::uint32_t idx : {ia, ib, ic}) {
      for (int k = 0; k < 3; ++k) acc[3 * idx + k] += n[k];
    }
  }
  mesh.normals.assign(3 * v, 0.0f);
  for (std::size_t i = 0; i < v; ++i) {
    const double x = acc[3 * i], y = acc[3 * i + 1], z = acc[3 * i + 2];
    const double len = std::sqrt(x * x + y * y + z * z);
    if (len > 0.0) {
      mesh.normals[3 * i] = static_cast<float>(x / len);
      mesh.normals[3 * i + 1] = static_cast<float>(y / len);
      mesh.normals[3 * i + 2] = static_cast<float>(z / len);
    } else {
      mesh.normals[3 * i + 2] = 1.0f;
    }
  }
  return mesh;
}

}  // namespace parasync::geometry
