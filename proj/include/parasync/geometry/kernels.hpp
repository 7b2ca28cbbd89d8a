// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace parasync::geometry {

/// Row-major 3x4 affine map: p' = L·p + t.
struct Affine {
  std::array<double, 9> linear{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> offset{0, 0, 0};

  static Affine translation(double dx, double dy, double dz);
  static Affine rotation_z(double degrees);
  static Affine scaling(double sx, double sy, double sz);

  double determinant() const;
};

struct ZRange {
  float min = 0.0f;
  float max = 0.0f;
};

/// Per-vertex kernels over packed xyz arrays. The default namespace runs
/// OpenMP-parallel loops once the array is large enough; `serial` holds the
/// reference loops used to check them. Both evaluate the same per-element
/// expression, so results agree bit for bit.
namespace kernels {

/// Vertex count below which the parallel kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 4096;

void transform_points(std::span<float> xyz, const Affine& map);
/// Applies `linear` to each direction and renormalizes to unit length.
void transform_directions(std::span<float> xyz, const std::array<double, 9>& linear);
/// Rotates each point about the z axis by radians·(z − z_min)/(z_max − z_min).
void twist_points(std::span<float> xyz, double radians, ZRange range);
ZRange z_range(std::span<const float> xyz);
/// dst[i] = src[i] + offset for every xyz triple.
void offset_copy(std::span<const float> src, std::span<float> dst, std::array<double, 3> offset);
/// dst[i] = src[i] + base.
void rebase_indices(std::span<const std::uint32_t> src, std::span<std::uint32_t> dst,
                    std::uint32_t base);

namespace serial {
void transform_points(std::span<float> xyz, const Affine& map);
void transform_directions(std::span<float> xyz, const std::array<double, 9>& linear);
void twist_points(std::span<float> xyz, double radians, ZRange range);
ZRange z_range(std::span<const float> xyz);
void offset_copy(std::span<const float> src, std::span<float> dst, std::array<double, 3> offset);
void rebase_indices(std::span<const std::uint32_t> src, std::span<std::uint32_t> dst,
                    std::uint32_t base);
}  // namespace serial

}  // namespace kernels
}  // namespace parasync::geometry
