#pragma once

// OBJ and PLY (ascii, binary little-endian) reading and writing for
// triangle meshes and oriented sample sets.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/mesh.hpp"

namespace ponq {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

inline void fan_triangulate(const std::vector<std::int64_t>& poly, std::size_t vcount, TriMesh& mesh) {
  if (poly.size() < 3) fail(ErrorCode::kParse, "face with fewer than 3 vertices");
  for (auto i : poly)
    if (i < 0 || static_cast<std::size_t>(i) >= vcount) fail(ErrorCode::kParse, "face index out of range");
  for (std::size_t k = 1; k + 1 < poly.size(); ++k)
    mesh.triangles.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[k]),
                              static_cast<std::uint32_t>(poly[k + 1])});
}

inline void append_double(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) fail(ErrorCode::kParse, "unexpected end of binary data");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

/// OBJ: `v` and `f` records, 1-based (or negative relative) indices,
/// polygons fan-triangulated. Other records are ignored.
inline TriMesh read_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) fail(ErrorCode::kParse, "bad vertex at line " + std::to_string(lineno));
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::int64_t> poly;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        std::int64_t idx = 0;
        try {
          idx = std::stoll(tok.substr(0, slash));
        } catch (const std::exception&) {
          fail(ErrorCode::kParse, "bad face index at line " + std::to_string(lineno));
        }
        if (idx == 0) fail(ErrorCode::kParse, "zero face index at line " + std::to_string(lineno));
        poly.push_back(idx > 0 ? idx - 1 : static_cast<std::int64_t>(mesh.vertices.size()) + idx);
      }
      detail::fan_triangulate(poly, mesh.vertices.size(), mesh);
    }
  }
  return mesh;
}

inline void write_obj(std::ostream& out, const TriMesh& mesh) {
  std::string s;
  for (const auto& v : mesh.vertices) {
    s += "v ";
    detail::append_double(s, v.x);
    s += ' ';
    detail::append_double(s, v.y);
    s += ' ';
    detail::append_double(s, v.z);
    s += '\n';
  }
  for (const auto& t : mesh.triangles)
    s += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) + '\n';
  out << s;
  if (!out) fail(ErrorCode::kIo, "failed writing OBJ");
}

/// Parsed PLY: vertex properties by name, faces, and comments.
struct PlyData {
  std::vector<std::string> vertex_properties;
  std::vector<std::vector<double>> vertex_columns;
  std::vector<std::vector<std::int64_t>> faces;
  std::vector<std::string> comments;

  const std::vector<double>* column(std::string_view name) const {
    for (std::size_t i = 0; i < vertex_properties.size(); ++i)
      if (vertex_properties[i] == name) return &vertex_columns[i];
    return nullptr;
  }
};

namespace detail {

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

inline PlyType ply_type(const std::string& s) {
  if (s == "char" || s == "int8") return PlyType::kI8;
  if (s == "uchar" || s == "uint8") return PlyType::kU8;
  if (s == "short" || s == "int16") return PlyType::kI16;
  if (s == "ushort" || s == "uint16") return PlyType::kU16;
  if (s == "int" || s == "int32") return PlyType::kI32;
  if (s == "uint" || s == "uint32") return PlyType::kU32;
  if (s == "float" || s == "float32") return PlyType::kF32;
  if (s == "double" || s == "float64") return PlyType::kF64;
  fail(ErrorCode::kParse, "unknown PLY type " + s);
}

inline double read_binary(std::istream& in, PlyType t) {
  switch (t) {
    case PlyType::kI8: return get_le<std::int8_t>(in);
    case PlyType::kU8: return get_le<std::uint8_t>(in);
    case PlyType::kI16: return get_le<std::int16_t>(in);
    case PlyType::kU16: return get_le<std::uint16_t>(in);
    case PlyType::kI32: return get_le<std::int32_t>(in);
    case PlyType::kU32: return get_le<std::uint32_t>(in);
    case PlyType::kF32: return get_le<float>(in);
    case PlyType::kF64: return get_le<double>(in);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::kU8;
  PlyType type = PlyType::kF32;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace detail

/// PLY reader for ascii and binary_little_endian files.
inline PlyData read_ply(std::istream& in) {
  using namespace detail;
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") fail(ErrorCode::kParse, "missing PLY magic");
  std::string format;
  std::vector<PlyElement> elements;
  PlyData data;
  while (true) {
    if (!std::getline(in, line)) fail(ErrorCode::kParse, "unterminated PLY header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      ls >> format;
    } else if (tag == "comment") {
      data.comments.push_back(line.size() > 8 ? line.substr(8) : "");
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) fail(ErrorCode::kParse, "PLY property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = ply_type(ct);
        p.type = ply_type(it);
      } else {
        p.type = ply_type(t);
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    }
  }
  const bool binary = format == "binary_little_endian";
  if (!binary && format != "ascii") fail(ErrorCode::kParse, "unsupported PLY format " + format);

  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    const bool is_face = e.name == "face";
    if (is_vertex) {
      for (const auto& p : e.properties) data.vertex_properties.push_back(p.name);
      data.vertex_columns.assign(e.properties.size(), std::vector<double>(e.count));
    }
    std::string row;
    for (std::size_t r = 0; r < e.count; ++r) {
      std::istringstream ls;
      if (!binary) {
        if (!std::getline(in, row)) fail(ErrorCode::kParse, "truncated PLY body");
        ls.str(row);
      }
      auto next = [&](PlyType t) -> double {
        if (binary) return read_binary(in, t);
        double v;
        if (!(ls >> v)) fail(ErrorCode::kParse, "truncated PLY row");
        return v;
      };
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        const auto& p = e.properties[k];
        if (p.is_list) {
          const auto n = static_cast<std::size_t>(next(p.count_type));
          std::vector<std::int64_t> idx(n);
          for (auto& x : idx) x = static_cast<std::int64_t>(next(p.type));
          if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) data.faces.push_back(idx);
        } else {
          const double v = next(p.type);
          if (is_vertex) data.vertex_columns[k][r] = v;
        }
      }
    }
  }
  return data;
}

inline TriMesh ply_to_mesh(const PlyData& ply) {
  const auto *x = ply.column("x"), *y = ply.column("y"), *z = ply.column("z");
  if (!x || !y || !z) fail(ErrorCode::kParse, "PLY vertices lack x/y/z");
  TriMesh mesh;
  for (std::size_t i = 0; i < x->size(); ++i) mesh.vertices.push_back({(*x)[i], (*y)[i], (*z)[i]});
  for (const auto& f : ply.faces) detail::fan_triangulate(f, mesh.vertices.size(), mesh);
  return mesh;
}

/// Binary little-endian PLY with double coordinates.
inline void write_ply(std::ostream& out, const TriMesh& mesh) {
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) {
    detail::put_le(out, v.x);
    detail::put_le(out, v.y);
    detail::put_le(out, v.z);
  }
  for (const auto& t : mesh.triangles) {
    detail::put_le<std::uint8_t>(out, 3);
    for (auto i : t) detail::put_le(out, static_cast<std::int32_t>(i));
  }
  if (!out) fail(ErrorCode::kIo, "failed writing PLY");
}

inline TriMesh read_mesh(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  const auto ext = detail::lower_extension(path);
  if (ext == ".obj") return read_obj(in);
  if (ext == ".ply") return ply_to_mesh(read_ply(in));
  fail(ErrorCode::kInvalidInput, "unsupported mesh extension " + ext);
}

inline void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  auto out = detail::open_out(path);
  if (detail::lower_extension(path) == ".ply")
    write_ply(out, mesh);
  else
    write_obj(out, mesh);
}

inline constexpr std::string_view kOpenBoundaryComment = "ponq open_boundary";

struct SampleSet {
  std::vector<SurfaceSample> samples;
  /// Samples carry boundary augmentation for an open surface.
  bool open_boundary = false;
};

/// Oriented samples as a binary PLY with double x/y/z/nx/ny/nz.
inline void write_samples(std::ostream& out, const SampleSet& set) {
  out << "ply\nformat binary_little_endian 1.0\n";
  if (set.open_boundary) out << "comment " << kOpenBoundaryComment << "\n";
  out << "element vertex " << set.samples.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property double nx\nproperty double ny\nproperty double nz\nend_header\n";
  for (const auto& s : set.samples)
    for (double v : {s.position.x, s.position.y, s.position.z, s.normal.x, s.normal.y, s.normal.z})
      detail::put_le(out, v);
  if (!out) fail(ErrorCode::kIo, "failed writing samples");
}

inline SampleSet read_samples(std::istream& in) {
  const auto ply = read_ply(in);
  const std::vector<double>* c[6] = {ply.column("x"),  ply.column("y"),  ply.column("z"),
                                     ply.column("nx"), ply.column("ny"), ply.column("nz")};
  for (auto* col : c)
    if (!col) fail(ErrorCode::kParse, "sample PLY needs x y z nx ny nz");
  SampleSet set;
  for (std::size_t i = 0; i < c[0]->size(); ++i)
    set.samples.push_back({{(*c[0])[i], (*c[1])[i], (*c[2])[i]}, {(*c[3])[i], (*c[4])[i], (*c[5])[i]}});
  set.open_boundary = std::find(ply.comments.begin(), ply.comments.end(), kOpenBoundaryComment) != ply.comments.end();
  return set;
}

inline void write_samples(const std::filesystem::path& path, const SampleSet& set) {
  auto out = detail::open_out(path);
  write_samples(out, set);
}

inline SampleSet read_samples(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  return read_samples(in);
}

}  // namespace ponq
