#pragma once

// Mesh comparison metrics (Chamfer distance, F-score, normal consistency,
// and their sharp-edge variants) and structural validation (watertightness,
// exact self-intersection test).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/mesh.hpp"
#include "ponq/parallel.hpp"
#include "ponq/predicates.hpp"
#include "ponq/sampling.hpp"
#include "ponq/spatial.hpp"

namespace ponq {

inline constexpr double kF1Threshold = 0.003;
inline constexpr double kEdgeF1Threshold = 0.005;
inline constexpr std::size_t kMetricSamples = 100000;
inline constexpr std::size_t kEdgeSamples = 100000;

namespace detail {

inline std::vector<Vec3> sample_positions(std::span<const SurfaceSample> s) {
  std::vector<Vec3> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(x.position);
  return out;
}

// Squared distance from each query to its nearest point in `target`.
inline std::vector<NearestHit> nearest_all(std::span<const Vec3> queries, std::span<const Vec3> target) {
  const KdTree tree(target);
  std::vector<NearestHit> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { out[i] = tree.nearest(queries[i]); }, 1024);
  return out;
}

inline double mean(std::span<const double> v) { return v.empty() ? 0.0 : pairwise_sum(v) / v.size(); }

inline double f_score(std::span<const NearestHit> ab, std::span<const NearestHit> ba, double threshold) {
  auto frac = [&](std::span<const NearestHit> h) {
    std::size_t hit = 0;
    for (const auto& x : h) hit += std::sqrt(x.squared_distance) < threshold;
    return h.empty() ? 0.0 : static_cast<double>(hit) / h.size();
  };
  const double precision = frac(ab), recall = frac(ba);
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

inline double chamfer_of(std::span<const NearestHit> ab, std::span<const NearestHit> ba) {
  std::vector<double> a, b;
  a.reserve(ab.size());
  b.reserve(ba.size());
  for (const auto& x : ab) a.push_back(x.squared_distance);
  for (const auto& x : ba) b.push_back(x.squared_distance);
  return mean(a) + mean(b);
}

inline void require_mesh(const TriMesh& m) {
  if (m.triangles.empty() || m.vertices.empty()) fail(ErrorCode::kInvalidInput, "metric on an empty mesh");
}

}  // namespace detail

/// Nearest-sample matches between two surface samplings.
struct SampleMatch {
  std::vector<SurfaceSample> a, b;
  std::vector<NearestHit> ab, ba;
};

inline SampleMatch match_meshes(const TriMesh& mesh_a, const TriMesh& mesh_b, std::size_t n_samples,
                                std::uint64_t seed) {
  detail::require_mesh(mesh_a);
  detail::require_mesh(mesh_b);
  SampleMatch m;
  m.a = sample_surface(mesh_a, n_samples, seed);
  m.b = sample_surface(mesh_b, n_samples, seed);
  const auto pa = detail::sample_positions(m.a), pb = detail::sample_positions(m.b);
  m.ab = detail::nearest_all(pa, pb);
  m.ba = detail::nearest_all(pb, pa);
  return m;
}

inline double chamfer(const SampleMatch& m) { return detail::chamfer_of(m.ab, m.ba); }
inline double f1(const SampleMatch& m, double threshold) { return detail::f_score(m.ab, m.ba, threshold); }

inline double normal_consistency(const SampleMatch& m) {
  std::vector<double> ab(m.ab.size()), ba(m.ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) ab[i] = std::abs(dot(m.a[i].normal, m.b[m.ab[i].index].normal));
  for (std::size_t i = 0; i < ba.size(); ++i) ba[i] = std::abs(dot(m.b[i].normal, m.a[m.ba[i].index].normal));
  return 0.5 * (detail::mean(ab) + detail::mean(ba));
}

/// Bi-directional Chamfer distance between surface samplings of two meshes.
inline double eval_cd(const TriMesh& a, const TriMesh& b, std::size_t n_samples = kMetricSamples,
                      std::uint64_t seed = 0) {
  return chamfer(match_meshes(a, b, n_samples, seed));
}

inline double eval_f1(const TriMesh& a, const TriMesh& b, double threshold = kF1Threshold,
                      std::size_t n_samples = kMetricSamples, std::uint64_t seed = 0) {
  return f1(match_meshes(a, b, n_samples, seed), threshold);
}

inline double eval_nc(const TriMesh& a, const TriMesh& b, std::size_t n_samples = kMetricSamples,
                      std::uint64_t seed = 0) {
  return normal_consistency(match_meshes(a, b, n_samples, seed));
}

struct EdgeMetrics {
  double ecd = 0.0;
  double ef1 = 1.0;
};

/// Chamfer distance and F-score between sharp-edge samplings. When only one
/// mesh has sharp edges ecd is +inf and ef1 is 0; when neither has, (0, 1).
inline EdgeMetrics eval_edge(const TriMesh& a, const TriMesh& b, double angle = kSharpEdgeAngle,
                             std::size_t n_samples = kEdgeSamples, double ef1_threshold = kEdgeF1Threshold,
                             std::uint64_t seed = 0) {
  const auto ea = sample_sharp_edges(a, angle, n_samples, seed);
  const auto eb = sample_sharp_edges(b, angle, n_samples, seed);
  if (ea.empty() && eb.empty()) return {0.0, 1.0};
  if (ea.empty() || eb.empty()) return {std::numeric_limits<double>::infinity(), 0.0};
  const auto ab = detail::nearest_all(ea, eb);
  const auto ba = detail::nearest_all(eb, ea);
  return {detail::chamfer_of(ab, ba), detail::f_score(ab, ba, ef1_threshold)};
}

struct WatertightReport {
  bool watertight = false;
  /// Edges with an odd or single incident triangle count.
  std::vector<EdgeKey> boundary_edges;
  /// Edges whose incident triangles do not pair up with opposite directions.
  std::vector<EdgeKey> misoriented_edges;
};

inline WatertightReport check_watertight(const TriMesh& mesh) {
  WatertightReport r;
  std::map<EdgeKey, std::pair<int, int>> count;  // (a->b, b->a) with a < b
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const auto u = t[k], v = t[(k + 1) % 3];
      auto& c = count[make_edge(u, v)];
      (u < v ? c.first : c.second)++;
    }
  for (const auto& [e, c] : count) {
    const int total = c.first + c.second;
    if (total < 2 || total % 2 != 0)
      r.boundary_edges.push_back(e);
    else if (c.first != c.second)
      r.misoriented_edges.push_back(e);
  }
  r.watertight = !mesh.triangles.empty() && r.boundary_edges.empty() && r.misoriented_edges.empty();
  return r;
}

namespace detail {

// Exact sign of (b - a) x (c - a) in 2D.
inline int orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  const double det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  const double bound = 8.0 * kEps * (std::abs((bx - ax) * (cy - ay)) + std::abs((by - ay) * (cx - ax)));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  using exact::Expansion;
  const Expansion e = Expansion::difference(bx, ax) * Expansion::difference(cy, ay) -
                      Expansion::difference(by, ay) * Expansion::difference(cx, ax);
  return e.sign();
}

struct Point2 {
  double x, y;
};

inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
  return orient2d(a.x, a.y, b.x, b.y, c.x, c.y);
}

inline bool on_segment_box(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Closed segment intersection.
inline bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const int o1 = orient2d(a, b, c), o2 = orient2d(a, b, d);
  const int o3 = orient2d(c, d, a), o4 = orient2d(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment_box(a, b, c)) return true;
  if (o2 == 0 && on_segment_box(a, b, d)) return true;
  if (o3 == 0 && on_segment_box(c, d, a)) return true;
  if (o4 == 0 && on_segment_box(c, d, b)) return true;
  return false;
}

// Closed point-in-triangle (any orientation; triangle non-degenerate).
inline bool point_in_triangle(const Point2& p, const std::array<Point2, 3>& t) {
  const int s0 = orient2d(t[0], t[1], p), s1 = orient2d(t[1], t[2], p), s2 = orient2d(t[2], t[0], p);
  return (s0 >= 0 && s1 >= 0 && s2 >= 0) || (s0 <= 0 && s1 <= 0 && s2 <= 0);
}

inline int dominant_axis(const Vec3& n) {
  const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
  return ax >= ay ? (ax >= az ? 0 : 2) : (ay >= az ? 1 : 2);
}

inline Point2 project(const Vec3& p, int drop) {
  if (drop == 0) return {p.y, p.z};
  if (drop == 1) return {p.z, p.x};
  return {p.x, p.y};
}

using Tri3 = std::array<Vec3, 3>;

// Coplanar closed triangle-triangle test after projection.
inline bool coplanar_intersect(const Tri3& p, const Tri3& q) {
  const int drop = dominant_axis(cross(p[1] - p[0], p[2] - p[0]));
  std::array<Point2, 3> a, b;
  for (int i = 0; i < 3; ++i) {
    a[i] = project(p[i], drop);
    b[i] = project(q[i], drop);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_intersect(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3])) return true;
  return point_in_triangle(a[0], b) || point_in_triangle(b[0], a);
}

// Closed segment vs triangle, both in one plane.
inline bool coplanar_segment_intersect(const Tri3& t, const Vec3& u, const Vec3& v) {
  const int drop = dominant_axis(cross(t[1] - t[0], t[2] - t[0]));
  std::array<Point2, 3> a;
  for (int i = 0; i < 3; ++i) a[i] = project(t[i], drop);
  const Point2 pu = project(u, drop), pv = project(v, drop);
  for (int i = 0; i < 3; ++i)
    if (segments_intersect(a[i], a[(i + 1) % 3], pu, pv)) return true;
  return point_in_triangle(pu, a);
}

// Closed segment vs triangle, segment not coplanar with the triangle.
inline bool segment_crosses_triangle(const Vec3& u, const Vec3& v, const Tri3& t) {
  const int su = orient3d(t[0], t[1], t[2], u), sv = orient3d(t[0], t[1], t[2], v);
  if (su * sv > 0 || (su == 0 && sv == 0)) return false;
  const int a = orient3d(u, v, t[0], t[1]), b = orient3d(u, v, t[1], t[2]), c = orient3d(u, v, t[2], t[0]);
  return (a >= 0 && b >= 0 && c >= 0) || (a <= 0 && b <= 0 && c <= 0);
}

}  // namespace detail

/// Exact closed intersection test between two non-degenerate triangles.
inline bool triangles_intersect(const std::array<Vec3, 3>& p, const std::array<Vec3, 3>& q) {
  std::array<int, 3> sq, sp;
  for (int i = 0; i < 3; ++i) {
    sq[i] = orient3d(p[0], p[1], p[2], q[i]);
    sp[i] = orient3d(q[0], q[1], q[2], p[i]);
  }
  auto same_side = [](const std::array<int, 3>& s) {
    return (s[0] > 0 && s[1] > 0 && s[2] > 0) || (s[0] < 0 && s[1] < 0 && s[2] < 0);
  };
  if (same_side(sq) || same_side(sp)) return false;
  if (sq[0] == 0 && sq[1] == 0 && sq[2] == 0) return detail::coplanar_intersect(p, q);
  for (int i = 0; i < 3; ++i) {
    if (detail::segment_crosses_triangle(q[i], q[(i + 1) % 3], p)) return true;
    if (detail::segment_crosses_triangle(p[i], p[(i + 1) % 3], q)) return true;
  }
  // An edge lying in the other triangle's plane.
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (sq[i] == 0 && sq[j] == 0 && detail::coplanar_segment_intersect(p, q[i], q[j])) return true;
    if (sp[i] == 0 && sp[j] == 0 && detail::coplanar_segment_intersect(q, p[i], p[j])) return true;
  }
  return false;
}

struct SelfIntersectionReport {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  bool intersection_free() const { return pairs.empty(); }
};

/// Exact test over all pairs of triangles sharing no vertex, pruned by a
/// sweep over bounding boxes.
inline SelfIntersectionReport check_self_intersection(const TriMesh& mesh) {
  const std::size_t n = mesh.triangles.size();
  std::vector<Vec3> lo(n), hi(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& tri = mesh.triangles[t];
    lo[t] = hi[t] = mesh.vertices[tri[0]];
    for (int k = 1; k < 3; ++k) {
      lo[t] = cwise_min(lo[t], mesh.vertices[tri[k]]);
      hi[t] = cwise_max(hi[t], mesh.vertices[tri[k]]);
    }
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return lo[a].x < lo[b].x || (lo[a].x == lo[b].x && a < b);
  });

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> found(n);
  parallel_for(n, [&](std::size_t oi) {
    const auto a = order[oi];
    const auto& ta = mesh.triangles[a];
    const std::array<Vec3, 3> pa = {mesh.vertices[ta[0]], mesh.vertices[ta[1]], mesh.vertices[ta[2]]};
    for (std::size_t oj = oi + 1; oj < n && lo[order[oj]].x <= hi[a].x; ++oj) {
      const auto b = order[oj];
      if (lo[b].y > hi[a].y || hi[b].y < lo[a].y || lo[b].z > hi[a].z || hi[b].z < lo[a].z) continue;
      const auto& tb = mesh.triangles[b];
      bool shared = false;
      for (auto x : ta)
        for (auto y : tb) shared = shared || x == y;
      if (shared) continue;
      const std::array<Vec3, 3> pb = {mesh.vertices[tb[0]], mesh.vertices[tb[1]], mesh.vertices[tb[2]]};
      if (triangles_intersect(pa, pb)) found[oi].push_back({std::min(a, b), std::max(a, b)});
    }
  }, 256);
  SelfIntersectionReport r;
  for (auto& f : found) r.pairs.insert(r.pairs.end(), f.begin(), f.end());
  std::sort(r.pairs.begin(), r.pairs.end());
  return r;
}

/// Everything the evaluation command reports.
struct MetricsReport {
  double cd = 0.0;
  double f1 = 0.0;
  double nc = 0.0;
  double ecd = 0.0;
  double ef1 = 0.0;
  bool watertight = false;
  bool self_intersection_free = false;
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
};

struct EvalOptions {
  double f1_threshold = kF1Threshold;
  double ef1_threshold = kEdgeF1Threshold;
  double edge_angle = kSharpEdgeAngle;
  std::size_t samples = kMetricSamples;
  std::size_t edge_samples = kEdgeSamples;
  std::uint64_t seed = 0;
};

/// Compares `mesh` against the reference `truth`; validity flags refer to `mesh`.
inline MetricsReport evaluate_mesh(const TriMesh& mesh, const TriMesh& truth, const EvalOptions& opt = {}) {
  MetricsReport r;
  const auto m = match_meshes(mesh, truth, opt.samples, opt.seed);
  r.cd = chamfer(m);
  r.f1 = f1(m, opt.f1_threshold);
  r.nc = normal_consistency(m);
  const auto e = eval_edge(mesh, truth, opt.edge_angle, opt.edge_samples, opt.ef1_threshold, opt.seed);
  r.ecd = e.ecd;
  r.ef1 = e.ef1;
  r.watertight = check_watertight(mesh).watertight;
  r.self_intersection_free = check_self_intersection(mesh).intersection_free();
  r.vertex_count = mesh.vertices.size();
  r.face_count = mesh.triangles.size();
  return r;
}

}  // namespace ponq
