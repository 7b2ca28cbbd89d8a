// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parasync/geometry/mesh.hpp"

namespace parasync::wire {

// Binary mesh frame, all fields little-endian:
//
//   offset  size  field
//        0     4  magic "PMS1"
//        4     2  version (1)
//        6     2  flags (bit 0: normals present)
//        8     4  model_id
//       12     4  revision
//       16     4  vertex_count V
//       20     4  triangle_count T
//       24  12·V  positions, f32 xyz
//        …  12·V  normals, f32 xyz (only with flag bit 0)
//        …  12·T  indices, u32
inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'P', 'M', 'S', '1'};
inline constexpr std::uint16_t kFrameVersion = 1;
inline constexpr std::uint16_t kFlagNormals = 0x1;
inline constexpr std::size_t kFrameHeaderSize = 24;

enum class FrameErrorCode {
  truncated_header,
  bad_magic,
  unsupported_version,
  unknown_flags,
  truncated_body,
  trailing_bytes,
  index_out_of_range,
  non_finite,
  too_large,
  invalid_mesh,
};

std::string_view to_string(FrameErrorCode code);

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  FrameErrorCode code() const { return code_; }

 private:
  FrameErrorCode code_;
};

struct FrameHeader {
  std::uint16_t version = kFrameVersion;
  std::uint16_t flags = 0;
  std::uint32_t model_id = 0;
  std::uint64_t revision = 0;
  std::uint32_t vertex_count = 0;
  std::uint32_t triangle_count = 0;

  bool has_normals() const { return (flags & kFlagNormals) != 0; }
};

struct DecodedFrame {
  std::uint32_t model_id = 0;
  std::uint64_t revision = 0;
  geometry::Mesh mesh;
};

/// 24 + 12·V·(1 + normals) + 12·T.
std::uint64_t frame_size(std::uint64_t vertices, std::uint64_t triangles, bool normals);

std::vector<std::uint8_t> encode_mesh(std::uint32_t model_id, std::uint64_t revision, const geometry::Mesh& mesh);

/// Parses and checks the header plus the exact total length, without
/// touching the body.
FrameHeader decode_header(std::span<const std::uint8_t> bytes);

/// Total over arbitrary input: either a frame or a FrameError.
DecodedFrame decode_mesh(std::span<const std::uint8_t> bytes);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace parasync::wire
