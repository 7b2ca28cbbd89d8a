// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace parasync::geometry {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Indexed triangle mesh, z-up and right-handed. Positions and normals are
/// packed xyz triples; triangles are packed index triples wound
/// counter-clockwise when seen from outside.
struct Mesh {
  std::vector<float> positions;
  std::vector<float> normals;  // empty, or one unit normal per vertex
  std::vector<std::uint32_t> triangles;

  std::size_t vertex_count() const { return positions.size() / 3; }
  std::size_t triangle_count() const { return triangles.size() / 3; }
  bool has_normals() const { return !normals.empty(); }

  bool operator==(const Mesh&) const = default;
};

struct Bounds {
  std::array<double, 3> min{0.0, 0.0, 0.0};
  std::array<double, 3> max{0.0, 0.0, 0.0};
};

/// Throws GeometryError describing the first violated invariant.
void validate(const Mesh& mesh);
bool is_valid(const Mesh& mesh);

/// Axis-aligned bounds; all zeros for an empty mesh.
Bounds bounds(const Mesh& mesh);

/// Compares the raw bit patterns of every array, so -0.0 != 0.0 and NaN == NaN.
bool bitwise_equal(const Mesh& a, const Mesh& b);

/// Returns a copy carrying per-vertex normals from area-weighted face
/// averaging. Vertices with no incident area get (0, 0, 1).
Mesh with_normals(Mesh mesh);

}  // namespace parasync::geometry
