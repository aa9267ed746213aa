#pragma once

// Oriented samplings of triangle meshes: area-weighted surface samples,
// length-weighted samples along sharp edges, and boundary samples with their
// rotated-normal copies for open surfaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/mesh.hpp"
#include "ponq/parallel.hpp"
#include "ponq/random.hpp"

namespace ponq {

inline constexpr double kDegenerateArea = 1e-12;
inline constexpr double kSharpEdgeAngle = std::numbers::pi / 6.0;

/// Surface sample count for a grid of res^3 voxels: 1024 * (res^3)^(2/3).
inline std::size_t samples_for_resolution(std::size_t res) { return 1024 * res * res; }

namespace detail {

// Cumulative weights; index lookup by binary search on u * total.
struct WeightedPicker {
  std::vector<double> cdf;

  explicit WeightedPicker(const std::vector<double>& weights) {
    cdf.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) cdf.push_back(acc += w);
  }
  double total() const { return cdf.empty() ? 0.0 : cdf.back(); }
  std::size_t pick(double u) const {
    const double target = u * total();
    // upper_bound never lands on a zero-weight entry.
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    if (it != cdf.end()) return static_cast<std::size_t>(it - cdf.begin());
    std::size_t i = cdf.size() - 1;
    while (i > 0 && cdf[i] == cdf[i - 1]) --i;
    return i;
  }
};

inline Vec3 unit_normal(const TriMesh& mesh, const Triangle& t) {
  return normalized(triangle_cross(mesh, t));
}

}  // namespace detail

/// `count` area-weighted samples; sample i draws from its own counter stream.
inline std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t count,
                                                 std::uint64_t seed) {
  std::vector<double> weights(mesh.triangles.size());
  std::vector<Vec3> normals(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec3 c = triangle_cross(mesh, mesh.triangles[t]);
    const double area = 0.5 * norm(c);
    if (area > kDegenerateArea) {
      weights[t] = area;
      normals[t] = normalized(c);
    }
  }
  const detail::WeightedPicker picker(weights);
  if (!(picker.total() > 0.0))
    fail(ErrorCode::kEmptySurface, "mesh has no non-degenerate triangle to sample");

  std::vector<SurfaceSample> out(count);
  parallel_for(count, [&](std::size_t i) {
    CounterRng rng(seed, i);
    const std::size_t t = picker.pick(rng.uniform());
    const double r1 = std::sqrt(rng.uniform());
    const double u2 = rng.uniform();
    const auto& tri = mesh.triangles[t];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    out[i].position = a * (1.0 - r1) + b * (r1 * (1.0 - u2)) + c * (r1 * u2);
    out[i].normal = normals[t];
  });
  return out;
}

/// Edge shared by two triangles whose normals differ by more than a threshold.
struct SharpEdge {
  Vec3 a;
  Vec3 b;
};

inline std::vector<SharpEdge> sharp_edges(const TriMesh& mesh, double angle_threshold) {
  std::vector<SharpEdge> out;
  for (const auto& [edge, tris] : edge_incidence(mesh)) {
    if (tris.size() != 2) continue;
    const Vec3 c0 = triangle_cross(mesh, mesh.triangles[tris[0]]);
    const Vec3 c1 = triangle_cross(mesh, mesh.triangles[tris[1]]);
    if (0.5 * norm(c0) <= kDegenerateArea || 0.5 * norm(c1) <= kDegenerateArea) continue;
    const double angle = std::atan2(norm(cross(c0, c1)), dot(c0, c1));
    if (angle > angle_threshold)
      out.push_back({mesh.vertices[edge.first], mesh.vertices[edge.second]});
  }
  return out;
}

/// `count` points length-weighted along the sharp edges; empty when none.
inline std::vector<Vec3> sample_sharp_edges(const TriMesh& mesh, double angle_threshold,
                                            std::size_t count, std::uint64_t seed) {
  const auto edges = sharp_edges(mesh, angle_threshold);
  std::vector<double> lengths;
  lengths.reserve(edges.size());
  for (const auto& e : edges) lengths.push_back(distance(e.a, e.b));
  const detail::WeightedPicker picker(lengths);
  if (edges.empty() || !(picker.total() > 0.0)) return {};

  std::vector<Vec3> out(count);
  parallel_for(count, [&](std::size_t i) {
    CounterRng rng(seed, i);
    const auto& e = edges[picker.pick(rng.uniform())];
    const double t = rng.uniform();
    out[i] = e.a * (1.0 - t) + e.b * t;
  });
  return out;
}

struct BoundarySampling {
  std::vector<SurfaceSample> samples;  // incident triangle normal
  std::vector<SurfaceSample> rotated;  // normal turned by pi/2 about the edge
};

/// Samples on the edges incident to exactly one triangle. The rotated copy
/// keeps the position and turns the normal away from the surface interior.
inline BoundarySampling sample_boundary(const TriMesh& mesh, std::size_t count,
                                        std::uint64_t seed) {
  struct Entry {
    Vec3 a, b, normal, rotated;
    Vec3 centroid;
  };
  std::vector<Entry> entries;
  std::vector<double> lengths;
  for (const auto& [edge, tris] : edge_incidence(mesh)) {
    if (tris.size() != 1) continue;
    const auto& tri = mesh.triangles[tris[0]];
    const Vec3 c = triangle_cross(mesh, tri);
    if (0.5 * norm(c) <= kDegenerateArea) continue;
    Entry e;
    e.a = mesh.vertices[edge.first];
    e.b = mesh.vertices[edge.second];
    e.normal = normalized(c);
    e.centroid = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    const Vec3 tangent = normalized(e.b - e.a);
    e.rotated = normalized(cross(tangent, e.normal));
    const Vec3 mid = (e.a + e.b) * 0.5;
    if (dot(e.rotated, e.centroid - mid) > 0.0) e.rotated = -e.rotated;
    entries.push_back(e);
    lengths.push_back(distance(e.a, e.b));
  }
  if (entries.empty()) fail(ErrorCode::kNoBoundary, "mesh has no boundary edge");

  const detail::WeightedPicker picker(lengths);
  BoundarySampling out;
  out.samples.resize(count);
  out.rotated.resize(count);
  parallel_for(count, [&](std::size_t i) {
    CounterRng rng(seed, i);
    const auto& e = entries[picker.pick(rng.uniform())];
    const double t = rng.uniform();
    const Vec3 p = e.a * (1.0 - t) + e.b * t;
    out.samples[i] = {p, e.normal};
    out.rotated[i] = {p, e.rotated};
  });
  return out;
}

/// Total length of the boundary edges.
inline double boundary_length(const TriMesh& mesh) {
  double len = 0.0;
  for (const auto& [a, b] : boundary_edges(mesh))
    len += distance(mesh.vertices[a], mesh.vertices[b]);
  return len;
}

}  // namespace ponq
