// SPDX-License-Identifier: Apache-2.0
#include "parasync/geometry/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace parasync::geometry {

Affine Affine::translation(double dx, double dy, double dz) {
  Affine a;
  a.offset = {dx, dy, dz};
  return a;
}

Affine Affine::rotation_z(double degrees) {
  const double r = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(r);
  const double s = std::sin(r);
  Affine a;
  a.linear = {c, -s, 0, s, c, 0, 0, 0, 1};
  return a;
}

Affine Affine::scaling(double sx, double sy, double sz) {
  Affine a;
  a.linear = {sx, 0, 0, 0, sy, 0, 0, 0, sz};
  return a;
}

double Affine::determinant() const {
  const auto& m = linear;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

namespace {

using Index = std::ptrdiff_t;

inline void point_at(float* p, const Affine& a) {
  const double x = p[0], y = p[1], z = p[2];
  const auto& m = a.linear;
  p[0] = static_cast<float>(m[0] * x + m[1] * y + m[2] * z + a.offset[0]);
  p[1] = static_cast<float>(m[3] * x + m[4] * y + m[5] * z + a.offset[1]);
  p[2] = static_cast<float>(m[6] * x + m[7] * y + m[8] * z + a.offset[2]);
}

inline void direction_at(float* p, const std::array<double, 9>& m) {
  const double x = p[0], y = p[1], z = p[2];
  double nx = m[0] * x + m[1] * y + m[2] * z;
  double ny = m[3] * x + m[4] * y + m[5] * z;
  double nz = m[6] * x + m[7] * y + m[8] * z;
  const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (len > 0.0) {
    nx /= len;
    ny /= len;
    nz /= len;
  } else {
    nx = 0.0;
    ny = 0.0;
    nz = 1.0;
  }
  p[0] = static_cast<float>(nx);
  p[1] = static_cast<float>(ny);
  p[2] = static_cast<float>(nz);
}

inline void twist_at(float* p, double radians, double z_min, double extent) {
  const double angle = radians * ((static_cast<double>(p[2]) - z_min) / extent);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double x = p[0], y = p[1];
  p[0] = static_cast<float>(c * x - s * y);
  p[1] = static_cast<float>(s * x + c * y);
}

inline void offset_at(const float* src, float* dst, const std::array<double, 3>& o) {
  dst[0] = static_cast<float>(static_cast<double>(src[0]) + o[0]);
  dst[1] = static_cast<float>(static_cast<double>(src[1]) + o[1]);
  dst[2] = static_cast<float>(static_cast<double>(src[2]) + o[2]);
}

inline Index triples(std::span<const float> xyz) { return static_cast<Index>(xyz.size() / 3); }

inline bool go_parallel(Index n) { return n >= static_cast<Index>(kernels::kParallelThreshold); }

}  // namespace

namespace kernels {

void transform_points(std::span<float> xyz, const Affine& map) {
  const Index n = triples(xyz);
  float* data = xyz.data();
#pragma omp parallel for if (go_parallel(n)) schedule(static)
  for (Index i = 0; i < n; ++i) point_at(data + 3 * i, map);
}

void transform_directions(std::span<float> xyz, const std::array<double, 9>& linear) {
  const Index n = triples(xyz);
  float* data = xyz.data();
#pragma omp parallel for if (go_parallel(n)) schedule(static)
  for (Index i = 0; i < n; ++i) direction_at(data + 3 * i, linear);
}

void twist_points(std::span<float> xyz, double radians, ZRange range) {
  const double extent = static_cast<double>(range.max) - static_cast<double>(range.min);
  if (!(extent > 0.0)) return;
  const Index n = triples(xyz);
  const double z_min = range.min;
  float* data = xyz.data();
#pragma omp parallel for if (go_parallel(n)) schedule(static)
  for (Index i = 0; i < n; ++i) twist_at(data + 3 * i, radians, z_min, extent);
}

ZRange z_range(std::span<const float> xyz) {
  const Index n = triples(xyz);
  if (n == 0) return {};
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  const float* data = xyz.data();
#pragma omp parallel for if (go_parallel(n)) reduction(min : lo) reduction(max : hi)
  for (Index i = 0; i < n; ++i) {
    lo = std::min(lo, data[3 * i + 2]);
    hi = std::max(hi, data[3 * i + 2]);
  }
  return {lo, hi};
}

void offset_copy(std::span<const float> src, std::span<float> dst, std::array<double, 3> offset) {
  const Index n = triples(src);
  const float* in = src.data();
  float* out = dst.data();
#pragma omp parallel for if (go_parallel(n)) schedule(static)
  for (Index i = 0; i < n; ++i) offset_at(in + 3 * i, out + 3 * i, offset);
}

void rebase_indices(std::span<const std::uint32_t> src, std::span<std::uint32_t> dst,
                    std::uint32_t base) {
  const auto n = static_cast<Index>(src.size());
  const std::uint32_t* in = src.data();
  std::uint32_t* out = dst.data();
#pragma omp parallel for if (go_parallel(n / 3)) schedule(static)
  for (Index i = 0; i < n; ++i) out[i] = in[i] + base;
}

namespace serial {

void transform_points(std::span<float> xyz, const Affine& map) {
  for (Index i = 0; i < triples(xyz); ++i) point_at(xyz.data() + 3 * i, map);
}

void transform_directions(std::span<float> xyz, const std::array<double, 9>& linear) {
  for (Index i = 0; i < triples(xyz); ++i) direction_at(xyz.data() + 3 * i, linear);
}

void twist_points(std::span<float> xyz, double radians, ZRange range) {
  const double extent = static_cast<double>(range.max) - static_cast<double>(range.min);
  if (!(extent > 0.0)) return;
  for (Index i = 0; i < triples(xyz); ++i) twist_at(xyz.data() + 3 * i, radians, range.min, extent);
}

ZRange z_range(std::span<const float> xyz) {
  if (xyz.empty()) return {};
  ZRange r{xyz[2], xyz[2]};
  for (std::size_t i = 2; i < xyz.size(); i += 3) {
    r.min = std::min(r.min, xyz[i]);
    r.max = std::max(r.max, xyz[i]);
  }
  return r;
}

void offset_copy(std::span<const float> src, std::span<float> dst, std::array<double, 3> offset) {
  for (Index i = 0; i < triples(src); ++i) offset_at(src.data() + 3 * i, dst.data() + 3 * i, offset);
}

void rebase_indices(std::span<const std::uint32_t> src, std::span<std::uint32_t> dst,
                    std::uint32_t base) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] + base;
}

}  // namespace serial
}  // namespace kernels
}  // namespace parasync::geometry
