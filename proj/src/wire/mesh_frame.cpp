// SPDX-License-Identifier: Apache-2.0
#include "parasync/wire/mesh_frame.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace parasync::wire {

std::string_view to_string(FrameErrorCode code) {
  switch (code) {
    case FrameErrorCode::truncated_header: return "truncated_header";
    case FrameErrorCode::bad_magic: return "bad_magic";
    case FrameErrorCode::unsupported_version: return "unsupported_version";
    case FrameErrorCode::unknown_flags: return "unknown_flags";
    case FrameErrorCode::truncated_body: return "truncated_body";
    case FrameErrorCode::trailing_bytes: return "trailing_bytes";
    case FrameErrorCode::index_out_of_range: return "index_out_of_range";
    case FrameErrorCode::non_finite: return "non_finite";
    case FrameErrorCode::too_large: return "too_large";
    case FrameErrorCode::invalid_mesh: return "invalid_mesh";
  }
  return "unknown";
}

std::uint64_t frame_size(std::uint64_t vertices, std::uint64_t triangles, bool normals) {
  return kFrameHeaderSize + 12 * vertices * (normals ? 2 : 1) + 12 * triangles;
}

namespace {

constexpr std::uint64_t kU32Max = std::numeric_limits<std::uint32_t>::max();

class Writer {
 public:
  explicit Writer(std::size_t size) { out_.reserve(size); }

  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

std::uint16_t read_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void read_floats(const std::uint8_t* p, std::vector<float>& out, std::size_t count, const char* what) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float f = std::bit_cast<float>(read_u32(p + 4 * i));
    if (!std::isfinite(f)) {
      throw FrameError(FrameErrorCode::non_finite, std::string("non-finite ") + what + " component " + std::to_string(i));
    }
    out[i] = f;
  }
}

}  // namespace

std::vector<std::uint8_t> encode_mesh(std::uint32_t model_id, std::uint64_t revision, const geometry::Mesh& mesh) {
  try {
    geometry::validate(mesh);
  } catch (const geometry::GeometryError& e) {
    throw FrameError(FrameErrorCode::invalid_mesh, e.what());
  }
  const std::uint64_t v = mesh.vertex_count();
  const std::uint64_t t = mesh.triangle_count();
  if (v > kU32Max || t > kU32Max) throw FrameError(FrameErrorCode::too_large, "vertex or triangle count exceeds u32");
  if (revision > kU32Max) throw FrameError(FrameErrorCode::too_large, "revision exceeds the 32-bit wire field");
  const bool normals = mesh.has_normals();

  Writer w(static_cast<std::size_t>(frame_size(v, t, normals)));
  w.raw(kFrameMagic);
  w.u16(kFrameVersion);
  w.u16(normals ? kFlagNormals : 0);
  w.u32(model_id);
  w.u32(static_cast<std::uint32_t>(revision));
  w.u32(static_cast<std::uint32_t>(v));
  w.u32(static_cast<std::uint32_t>(t));
  for (float f : mesh.positions) w.f32(f);
  for (float f : mesh.normals) w.f32(f);
  for (std::uint32_t i : mesh.triangles) w.u32(i);
  return w.take();
}

FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) {
    throw FrameError(FrameErrorCode::truncated_header,
                     "frame of " + std::to_string(bytes.size()) + " bytes is shorter than the 24-byte header");
  }
  const std::uint8_t* p = bytes.data();
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), p)) throw FrameError(FrameErrorCode::bad_magic, "bad magic");
  FrameHeader h;
  h.version = read_u16(p + 4);
  if (h.version != kFrameVersion) {
    throw FrameError(FrameErrorCode::unsupported_version, "unsupported frame version " + std::to_string(h.version));
  }
  h.flags = read_u16(p + 6);
  if ((h.flags & ~kFlagNormals) != 0) {
    throw FrameError(FrameErrorCode::unknown_flags, "unknown flag bits " + std::to_string(h.flags));
  }
  h.model_id = read_u32(p + 8);
  h.revision = read_u32(p + 12);
  h.vertex_count = read_u32(p + 16);
  h.triangle_count = read_u32(p + 20);
  const std::uint64_t expected = frame_size(h.vertex_count, h.triangle_count, h.has_normals());
  if (bytes.size() < expected) {
    throw FrameError(FrameErrorCode::truncated_body, "frame body needs " + std::to_string(expected) + " bytes, got " +
                                                         std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FrameError(FrameErrorCode::trailing_bytes, std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  return h;
}

DecodedFrame decode_mesh(std::span<const std::uint8_t> bytes) {
  const FrameHeader h = decode_header(bytes);
  DecodedFrame frame;
  frame.model_id = h.model_id;
  frame.revision = h.revision;
  const std::size_t v = h.vertex_count, t = h.triangle_count;
  const std::uint8_t* p = bytes.data() + kFrameHeaderSize;
  read_floats(p, frame.mesh.positions, 3 * v, "position");
  p += 12 * v;
  if (h.has_normals()) {
    read_floats(p, frame.mesh.normals, 3 * v, "normal");
    p += 12 * v;
  }
  frame.mesh.triangles.resize(3 * t);
  for (std::size_t i = 0; i < 3 * t; ++i) {
    const std::uint32_t idx = read_u32(p + 4 * i);
    if (idx >= v) {
      throw FrameError(FrameErrorCode::index_out_of_range,
                       "index " + std::to_string(idx) + " at position " + std::to_string(i) + " exceeds vertex count " +
                           std::to_string(v));
    }
    frame.mesh.triangles[i] = idx;
  }
  return frame;
}

}  // namespace parasync::wire
