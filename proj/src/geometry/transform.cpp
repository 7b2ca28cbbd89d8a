// SPDX-License-Identifier: Apache-2.0
#include "parasync/geometry/transform.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "parasync/geometry/kernels.hpp"

namespace parasync::geometry {

namespace {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw GeometryError(std::string(what) + " must be finite");
}

void require_fits(std::size_t vertices) {
  if (vertices > std::numeric_limits<std::uint32_t>::max()) {
    throw GeometryError("mesh would exceed 2^32-1 vertices");
  }
}

Mesh apply(Mesh mesh, const Affine& map) {
  validate(mesh);
  kernels::transform_points(mesh.positions, map);
  if (mesh.has_normals()) {
    // Cofactor matrix = det·L^-T; the kernel renormalizes.
    const auto& m = map.linear;
    const std::array<double, 9> cof{
        m[4] * m[8] - m[5] * m[7], m[5] * m[6] - m[3] * m[8], m[3] * m[7] - m[4] * m[6],
        m[2] * m[7] - m[1] * m[8], m[0] * m[8] - m[2] * m[6], m[1] * m[6] - m[0] * m[7],
        m[1] * m[5] - m[2] * m[4], m[2] * m[3] - m[0] * m[5], m[0] * m[4] - m[1] * m[3],
    };
    const double sign = map.determinant() < 0.0 ? -1.0 : 1.0;
    std::array<double, 9> normal_map{};
    for (int i = 0; i < 9; ++i) normal_map[i] = sign * cof[i];
    kernels::transform_directions(mesh.normals, normal_map);
  }
  if (map.determinant() < 0.0) {
    for (std::size_t t = 0; t + 2 < mesh.triangles.size(); t += 3) {
      std::swap(mesh.triangles[t + 1], mesh.triangles[t + 2]);
    }
  }
  validate(mesh);
  return mesh;
}

}  // namespace

Mesh translate(Mesh mesh, double dx, double dy, double dz) {
  require_finite(dx, "translate dx");
  require_finite(dy, "translate dy");
  require_finite(dz, "translate dz");
  return apply(std::move(mesh), Affine::translation(dx, dy, dz));
}

Mesh rotate_z(Mesh mesh, double degrees) {
  require_finite(degrees, "rotation angle");
  return apply(std::move(mesh), Affine::rotation_z(degrees));
}

Mesh scale(Mesh mesh, double sx, double sy, double sz) {
  require_finite(sx, "scale sx");
  require_finite(sy, "scale sy");
  require_finite(sz, "scale sz");
  if (sx == 0.0 || sy == 0.0 || sz == 0.0) throw GeometryError("scale factors must be nonzero");
  return apply(std::move(mesh), Affine::scaling(sx, sy, sz));
}

Mesh twist(Mesh mesh, double degrees) {
  require_finite(degrees, "twist angle");
  validate(mesh);
  const ZRange range = kernels::z_range(mesh.positions);
  kernels::twist_points(mesh.positions, degrees * std::numbers::pi / 180.0, range);
  if (mesh.has_normals()) mesh = with_normals(std::move(mesh));
  validate(mesh);
  return mesh;
}

Mesh linear_array(const Mesh& mesh, int count, double dx, double dy, double dz) {
  validate(mesh);
  if (count < 1) throw GeometryError("linear_array count must be at least 1, got " + std::to_string(count));
  require_finite(dx, "linear_array dx");
  require_finite(dy, "linear_array dy");
  require_finite(dz, "linear_array dz");
  const std::size_t v = mesh.vertex_count();
  const auto copies = static_cast<std::size_t>(count);
  require_fits(v * copies);

  Mesh out;
  out.positions.resize(mesh.positions.size() * copies);
  out.triangles.resize(mesh.triangles.size() * copies);
  if (mesh.has_normals()) out.normals.resize(mesh.normals.size() * copies);
  for (std::size_t k = 0; k < copies; ++k) {
    const double kd = static_cast<double>(k);
    std::span<float> dst(out.positions.data() + k * mesh.positions.size(), mesh.positions.size());
    kernels::offset_copy(mesh.positions, dst, {kd * dx, kd * dy, kd * dz});
    std::span<std::uint32_t> idx(out.triangles.data() + k * mesh.triangles.size(), mesh.triangles.size());
    kernels::rebase_indices(mesh.triangles, idx, static_cast<std::uint32_t>(k * v));
    if (mesh.has_normals()) {
      std::copy(mesh.normals.begin(), mesh.normals.end(), out.normals.begin() + k * mesh.normals.size());
    }
  }
  validate(out);
  return out;
}

Mesh merge(std::span<const Mesh> meshes) {
  std::size_t positions = 0, triangles = 0;
  bool all_normals = true;
  for (const Mesh& m : meshes) {
    validate(m);
    positions += m.positions.size();
    triangles += m.triangles.size();
    if (m.vertex_count() > 0 && !m.has_normals()) all_normals = false;
  }
  require_fits(positions / 3);

  Mesh out;
  out.positions.reserve(positions);
  out.triangles.resize(triangles);
  if (all_normals) out.normals.reserve(positions);
  std::size_t tri_cursor = 0;
  for (const Mesh& m : meshes) {
    const auto base = static_cast<std::uint32_t>(out.positions.size() / 3);
    out.positions.insert(out.positions.end(), m.positions.begin(), m.positions.end());
    if (all_normals) out.normals.insert(out.normals.end(), m.normals.begin(), m.normals.end());
    kernels::rebase_indices(m.triangles, std::span(out.triangles.data() + tri_cursor, m.triangles.size()),
                            base);
    tri_cursor += m.triangles.size();
  }
  return out;
}

}  // namespace parasync::geometry
