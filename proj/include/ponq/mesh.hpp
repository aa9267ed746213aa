#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ponq/vec.hpp"

namespace ponq {

using Triangle = std::array<std::uint32_t, 3>;

/// Triangle soup with shared vertices, counter-clockwise outward orientation.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const { return triangles.empty(); }
};

/// Oriented surface sample.
struct SurfaceSample {
  Vec3 position;
  Vec3 normal;
};

inline Vec3 triangle_cross(const TriMesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  return cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a);
}

inline double triangle_area(const TriMesh& mesh, const Triangle& t) {
  return 0.5 * norm(triangle_cross(mesh, t));
}

inline double surface_area(const TriMesh& mesh) {
  double a = 0.0;
  for (const auto& t : mesh.triangles) a += triangle_area(mesh, t);
  return a;
}

/// Signed enclosed volume (positive for outward orientation).
inline double signed_volume(const TriMesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles)
    v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
  return v / 6.0;
}

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

inline EdgeKey make_edge(std::uint32_t a, std::uint32_t b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Triangles incident to each undirected edge, in triangle order.
inline std::map<EdgeKey, std::vector<std::uint32_t>> edge_incidence(const TriMesh& mesh) {
  std::map<EdgeKey, std::vector<std::uint32_t>> edges;
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) edges[make_edge(tri[k], tri[(k + 1) % 3])].push_back(t);
  }
  return edges;
}

/// Boundary edges are incident to exactly one triangle.
inline std::vector<EdgeKey> boundary_edges(const TriMesh& mesh) {
  std::vector<EdgeKey> out;
  for (const auto& [edge, tris] : edge_incidence(mesh))
    if (tris.size() == 1) out.push_back(edge);
  return out;
}

/// Number of closed loops formed by the boundary edges.
inline std::size_t boundary_loop_count(const TriMesh& mesh) {
  const auto edges = boundary_edges(mesh);
  std::map<std::uint32_t, std::uint32_t> parent;
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) {
    parent.try_emplace(a, a);
    parent.try_emplace(b, b);
  }
  for (const auto& [a, b] : edges) parent[find(a)] = find(b);
  std::size_t loops = 0;
  for (const auto& [v, p] : parent)
    if (find(v) == v) ++loops;
  return loops;
}

/// V - E + F over referenced vertices.
inline long euler_characteristic(const TriMesh& mesh) {
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles)
    for (auto v : t) used[v] = 1;
  const long v = std::count(used.begin(), used.end(), 1);
  const long e = static_cast<long>(edge_incidence(mesh).size());
  return v - e + static_cast<long>(mesh.triangles.size());
}

/// Drops unreferenced vertices and renumbers the triangles.
inline TriMesh compact(const TriMesh& mesh) {
  std::vector<std::uint32_t> remap(mesh.vertices.size(), UINT32_MAX);
  TriMesh out;
  for (const auto& t : mesh.triangles) {
    Triangle nt;
    for (int k = 0; k < 3; ++k) {
      auto& r = remap[t[k]];
      if (r == UINT32_MAX) {
        r = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[t[k]]);
      }
      nt[k] = r;
    }
    out.triangles.push_back(nt);
  }
  return out;
}

}  // namespace ponq
