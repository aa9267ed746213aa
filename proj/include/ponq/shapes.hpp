#pragma once

// Procedural test meshes.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "ponq/mesh.hpp"

namespace ponq::shapes {

/// Geodesic sphere: icosahedron subdivided `levels` times, projected.
inline TriMesh icosphere(int levels, double radius = 1.0, const Vec3& center = {}) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (auto& v : m.vertices) v = normalized(v);
  for (int l = 0; l < levels; ++l) {
    std::map<EdgeKey, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = make_edge(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
      mid.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      const auto ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  for (auto& v : m.vertices) v = center + v * radius;
  return m;
}

/// Torus around the z axis.
inline TriMesh torus(double major, double minor, int nu = 96, int nv = 48) {
  TriMesh m;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      const double u = 2.0 * std::numbers::pi * i / nu, v = 2.0 * std::numbers::pi * j / nv;
      const double r = major + minor * std::cos(v);
      m.vertices.push_back({r * std::cos(u), r * std::sin(u), minor * std::sin(v)});
    }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>((i % nu) * nv + (j % nv)); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

/// Axis-aligned box, 12 triangles.
inline TriMesh box(const Vec3& lo, const Vec3& hi) {
  TriMesh m;
  for (int c = 0; c < 8; ++c) m.vertices.push_back({(c & 1) ? hi.x : lo.x, (c & 2) ? hi.y : lo.y, (c & 4) ? hi.z : lo.z});
  m.triangles = {{0, 2, 3}, {0, 3, 1},   // z = lo
                 {4, 5, 7}, {4, 7, 6},   // z = hi
                 {0, 1, 5}, {0, 5, 4},   // y = lo
                 {2, 6, 7}, {2, 7, 3},   // y = hi
                 {0, 4, 6}, {0, 6, 2},   // x = lo
                 {1, 3, 7}, {1, 7, 5}};  // x = hi
  return m;
}

inline TriMesh cube(double side = 1.0) { return box(Vec3{} - Vec3{1, 1, 1} * (0.5 * side), Vec3{1, 1, 1} * (0.5 * side)); }

/// Square block [-h, h]^3 with a cylindrical hole of radius r along z.
inline TriMesh cube_minus_cylinder(double side = 1.0, double radius = 0.25, int segments = 64) {
  const double h = 0.5 * side;
  TriMesh m;
  // Outer ring: rays from the axis to the square at the segment angles.
  std::vector<Vec3> outer, inner;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    const double c = std::cos(a), s = std::sin(a);
    const double k = h / std::max(std::abs(c), std::abs(s));
    Vec3 o{k * c, k * s, 0.0};
    for (int d = 0; d < 2; ++d)
      if (std::abs(std::abs(o[d]) - h) < 1e-12) o[d] = std::copysign(h, o[d]);
    outer.push_back(o);
    inner.push_back({radius * c, radius * s, 0.0});
  }
  auto add_ring = [&](const std::vector<Vec3>& ring, double z) {
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    for (auto p : ring) {
      p.z = z;
      m.vertices.push_back(p);
    }
    return base;
  };
  const auto to = add_ring(outer, h), ti = add_ring(inner, h);
  const auto bo = add_ring(outer, -h), bi = add_ring(inner, -h);
  const auto n = static_cast<std::uint32_t>(segments);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    // Top annulus (normal +z) and bottom annulus (normal -z).
    m.triangles.push_back({to + i, to + j, ti + j});
    m.triangles.push_back({to + i, ti + j, ti + i});
    m.triangles.push_back({bo + i, bi + j, bo + j});
    m.triangles.push_back({bo + i, bi + i, bi + j});
    // Outer walls face away from the axis, the hole wall toward it.
    m.triangles.push_back({bo + i, bo + j, to + j});
    m.triangles.push_back({bo + i, to + j, to + i});
    m.triangles.push_back({bi + i, ti + j, bi + j});
    m.triangles.push_back({bi + i, ti + i, ti + j});
  }
  return m;
}

/// Thin rectangular plate.
inline TriMesh thin_plate(double width = 1.0, double thickness = 0.1) {
  return box({-0.5 * width, -0.5 * width, -0.5 * thickness}, {0.5 * width, 0.5 * width, 0.5 * thickness});
}

/// Open upper hemisphere (z >= 0), boundary on the equator.
inline TriMesh hemisphere(double radius = 1.0, int segments = 96, int rings = 24) {
  TriMesh m;
  m.vertices.push_back({0, 0, radius});
  for (int r = 1; r <= rings; ++r) {
    const double polar = 0.5 * std::numbers::pi * r / rings;
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * std::numbers::pi * i / segments;
      m.vertices.push_back({radius * std::sin(polar) * std::cos(a), radius * std::sin(polar) * std::sin(a),
                            r == rings ? 0.0 : radius * std::cos(polar)});
    }
  }
  auto id = [&](int r, int i) { return static_cast<std::uint32_t>(1 + (r - 1) * segments + (i % segments)); };
  for (int i = 0; i < segments; ++i) m.triangles.push_back({0, id(1, i), id(1, i + 1)});
  for (int r = 1; r < rings; ++r)
    for (int i = 0; i < segments; ++i) {
      m.triangles.push_back({id(r, i), id(r + 1, i), id(r + 1, i + 1)});
      m.triangles.push_back({id(r, i), id(r + 1, i + 1), id(r, i + 1)});
    }
  return m;
}

/// Unit square [0, 1]^2 in z = 0, normal +z.
inline TriMesh flat_square() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

inline TriMesh transformed(TriMesh m, double scale, const Vec3& offset = {}) {
  for (auto& v : m.vertices) v = v * scale + offset;
  return m;
}

/// Union of two meshes as one triangle list.
inline TriMesh merged(const TriMesh& a, const TriMesh& b) {
  TriMesh m = a;
  const auto base = static_cast<std::uint32_t>(a.vertices.size());
  m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& t : b.triangles) m.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  return m;
}

}  // namespace ponq::shapes
