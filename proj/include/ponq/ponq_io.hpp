#pragma once

// Binary PoNQ element file.
//
//   "PONQ"  u32 version (1)  u64 count  u32 flags
//   per element: p[3] n[3] v_star[3] A[6] (xx xy xz yy yz zz) b[3] c  f64
//                sample_count u64
//
// All values little-endian. Flag bit 0: quadrics normalized; bit 1: fit of
// an open surface.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/fitting.hpp"
#include "ponq/mesh_io.hpp"
#include "ponq/quadric.hpp"

namespace ponq {

inline constexpr std::uint32_t kPoNQVersion = 1;
inline constexpr std::uint32_t kFlagNormalized = 1u << 0;
inline constexpr std::uint32_t kFlagOpenSurface = 1u << 1;
inline constexpr std::size_t kPoNQHeaderBytes = 4 + 4 + 8 + 4;
inline constexpr std::size_t kPoNQElementBytes = 19 * 8 + 8;
inline constexpr double kPsdTolerance = 1e-9;

struct PoNQFile {
  std::uint32_t flags = 0;
  std::vector<PoNQElement> elements;

  bool normalized() const { return flags & kFlagNormalized; }
  bool open_surface() const { return flags & kFlagOpenSurface; }
};

inline void write_ponq(std::ostream& out, const PoNQFile& file) {
  out.write("PONQ", 4);
  detail::put_le(out, kPoNQVersion);
  detail::put_le(out, static_cast<std::uint64_t>(file.elements.size()));
  detail::put_le(out, file.flags);
  for (const auto& e : file.elements) {
    const auto& A = e.q.A;
    for (double v : {e.p.x, e.p.y, e.p.z, e.n.x, e.n.y, e.n.z, e.v_star.x, e.v_star.y, e.v_star.z, A(0, 0),
                     A(0, 1), A(0, 2), A(1, 1), A(1, 2), A(2, 2), e.q.b.x, e.q.b.y, e.q.b.z, e.q.c})
      detail::put_le(out, v);
    detail::put_le(out, e.sample_count);
  }
  if (!out) fail(ErrorCode::kIo, "failed writing PoNQ data");
}

inline PoNQFile read_ponq(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "PONQ") fail(ErrorCode::kParse, "missing PONQ magic");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kPoNQVersion) fail(ErrorCode::kParse, "unsupported PoNQ version " + std::to_string(version));
  const auto count = detail::get_le<std::uint64_t>(in);
  PoNQFile file;
  file.flags = detail::get_le<std::uint32_t>(in);

  // Payload length must match the count exactly.
  const auto body = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(body);
  if (body >= 0 && end >= 0) {
    const auto available = static_cast<std::uint64_t>(end - body);
    if (count > available / kPoNQElementBytes || available != count * kPoNQElementBytes)
      fail(ErrorCode::kParse, "PoNQ payload does not match its element count");
  }

  file.elements.resize(count);
  for (auto& e : file.elements) {
    double v[19];
    for (double& x : v) x = detail::get_le<double>(in);
    e.p = {v[0], v[1], v[2]};
    e.n = {v[3], v[4], v[5]};
    e.v_star = {v[6], v[7], v[8]};
    e.q.A = Mat3{{v[9], v[10], v[11], v[10], v[12], v[13], v[11], v[13], v[14]}};
    e.q.b = {v[15], v[16], v[17]};
    e.q.c = v[18];
    e.sample_count = detail::get_le<std::uint64_t>(in);
    for (double x : v)
      if (!std::isfinite(x)) fail(ErrorCode::kParse, "non-finite value in PoNQ file");
    const auto eig = eigen_decompose(e.q.A);
    if (eig.values[2] < -kPsdTolerance * std::max(1.0, std::abs(eig.values[0])))
      fail(ErrorCode::kParse, "quadric matrix is not positive semi-definite");
  }
  return file;
}

inline void write_ponq(const std::filesystem::path& path, const PoNQFile& file) {
  auto out = detail::open_out(path);
  write_ponq(out, file);
}

inline PoNQFile read_ponq(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_ponq(in);
}

}  // namespace ponq
