#pragma once

// Inside/outside labeling of the Delaunay tetrahedra of the optimal
// vertices and extraction of the interface surface.
//
// Stages: tetrahedra touching a protective corner are outside; tetrahedra
// whose circumcenter and barycenter lie strictly on one side of every
// vertex's tangent plane take that side; the smallest-edge rule seeds the
// missing side around each vertex; a minimum s-t cut decides the rest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "ponq/delaunay.hpp"
#include "ponq/error.hpp"
#include "ponq/fitting.hpp"
#include "ponq/maxflow.hpp"
#include "ponq/mesh.hpp"
#include "ponq/parallel.hpp"
#include "ponq/quadric.hpp"
#include "ponq/spatial.hpp"

namespace ponq {

enum class TetLabel : std::uint8_t { kInside, kOutside, kUnknown };

inline constexpr double kDefaultAnisotropyThreshold = 0.4;
inline constexpr double kEdgeThresholdFactor = 4.0;

struct ExtractionParams {
  /// Weight of the quadric term: squared inverse grid edge length.
  double h = 1.0;
  double smallest_edge_threshold = 0.0;
  double anisotropy_threshold = kDefaultAnisotropyThreshold;
};

struct TriangleScore {
  double s_n = 0.0;
  double s_q = 0.0;
  double total = 0.0;
  bool degenerate = false;
};

using Labels = std::vector<TetLabel>;

inline Labels tag_protective(const DelaunayComplex& dc) {
  Labels labels(dc.tet_count(), TetLabel::kUnknown);
  for (std::size_t t = 0; t < dc.tet_count(); ++t)
    for (auto v : dc.tetrahedra[t])
      if (dc.is_protective(v)) labels[t] = TetLabel::kOutside;
  return labels;
}

namespace detail {

inline void check_elements(const DelaunayComplex& dc, std::span<const PoNQElement> elements) {
  if (elements.size() != dc.input_count)
    fail(ErrorCode::kInvalidInput, "element count does not match the complex");
}

}  // namespace detail

/// Decides UNKNOWN tetrahedra whose circumcenter and barycenter are strictly
/// above (outside) or strictly below (inside) all four vertex tangent planes.
inline Labels tag_halfspace(const DelaunayComplex& dc, std::span<const PoNQElement> elements, Labels labels) {
  detail::check_elements(dc, elements);
  parallel_for(dc.tet_count(), [&](std::size_t t) {
    if (labels[t] != TetLabel::kUnknown) return;
    const Tet& tv = dc.tetrahedra[t];
    for (auto v : tv)
      if (dc.is_protective(v)) return;
    const std::array<Vec3, 2> probes = {circumcenter(dc, static_cast<std::uint32_t>(t)),
                                        barycenter(dc, static_cast<std::uint32_t>(t))};
    bool above = true, below = true;
    for (auto v : tv) {
      const Vec3& n = elements[v].n;
      for (const auto& x : probes) {
        const double d = dot(n, x - dc.vertices[v]);
        above = above && d > 0.0;
        below = below && d < 0.0;
      }
    }
    if (above) labels[t] = TetLabel::kOutside;
    if (below) labels[t] = TetLabel::kInside;
  }, 512);
  return labels;
}

inline double shortest_edge(const DelaunayComplex& dc, std::uint32_t t) {
  const Tet& tv = dc.tetrahedra[t];
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) best = std::min(best, distance(dc.vertices[tv[i]], dc.vertices[tv[j]]));
  return best;
}

/// Tetrahedra incident to each vertex, in increasing tetrahedron order.
inline std::vector<std::vector<std::uint32_t>> vertex_tets(const DelaunayComplex& dc) {
  std::vector<std::vector<std::uint32_t>> out(dc.vertices.size());
  for (std::uint32_t t = 0; t < dc.tet_count(); ++t)
    for (auto v : dc.tetrahedra[t]) out[v].push_back(t);
  return out;
}

/// One sequential pass in vertex order: a vertex with labeled incident
/// tetrahedra but none OUTSIDE (resp. INSIDE) gets its UNKNOWN incident
/// tetrahedron with the smallest shortest edge labeled OUTSIDE (resp.
/// INSIDE), provided that edge is below the threshold.
inline Labels tag_smallest_edge(const DelaunayComplex& dc, Labels labels, double threshold) {
  const auto incident = vertex_tets(dc);
  for (std::uint32_t v = 0; v < dc.vertices.size(); ++v) {
    if (dc.is_protective(v) || incident[v].empty()) continue;
    for (TetLabel side : {TetLabel::kOutside, TetLabel::kInside}) {
      bool labeled = false, has_side = false;
      std::uint32_t pick = kOutsideHull;
      double pick_edge = std::numeric_limits<double>::infinity();
      for (auto t : incident[v]) {
        if (labels[t] == TetLabel::kUnknown) {
          const double e = shortest_edge(dc, t);
          if (e < pick_edge) {
            pick_edge = e;
            pick = t;
          }
        } else {
          labeled = true;
          has_side = has_side || labels[t] == side;
        }
      }
      if (labeled && !has_side && pick != kOutsideHull && pick_edge < threshold) labels[pick] = side;
    }
  }
  return labels;
}

/// Median distance from each point to its nearest other point.
inline double median_nearest_distance(std::span<const Vec3> points) {
  if (points.size() < 2) return 0.0;
  const KdTree tree(points);
  std::vector<double> d(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    d[i] = std::sqrt(tree.nearest_excluding(points[i], static_cast<std::uint32_t>(i)).squared_distance);
  });
  auto mid = d.begin() + d.size() / 2;
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

inline std::vector<Vec3> optimal_vertices(std::span<const PoNQElement> elements) {
  std::vector<Vec3> out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.v_star);
  return out;
}

inline double default_edge_threshold(std::span<const PoNQElement> elements) {
  return kEdgeThresholdFactor * median_nearest_distance(optimal_vertices(elements));
}

/// S(T) = S_n + h S_Q for the triangle on elements (i, j, k).
inline TriangleScore triangle_score(const std::array<std::uint32_t, 3>& tri,
                                    std::span<const PoNQElement> elements, const ExtractionParams& params) {
  TriangleScore s;
  const PoNQElement* e[3] = {&elements[tri[0]], &elements[tri[1]], &elements[tri[2]]};
  const Vec3 c = cross(e[1]->v_star - e[0]->v_star, e[2]->v_star - e[0]->v_star);
  const double len = norm(c);
  Vec3 nt{0.0, 0.0, 1.0};
  if (len > 0.0 && std::isfinite(len)) {
    nt = c / len;
    if (dot(nt, e[0]->n) + dot(nt, e[1]->n) + dot(nt, e[2]->n) < 0.0) nt = -nt;
  } else {
    s.degenerate = true;
  }
  double angles = 0.0;
  for (const auto* x : e) angles += std::acos(std::clamp(dot(nt, x->n), -1.0, 1.0));
  const double a = 2.0 / std::numbers::pi * angles;
  s.s_n = a * a;
  double q = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) q += evaluate(e[i]->q, e[j]->v_star);
  s.s_q = std::max(q, 0.0);
  s.total = s.s_n + params.h * s.s_q;
  return s;
}

/// Vertices of face k of tetrahedron t, oriented outward from t.
inline std::array<std::uint32_t, 3> tet_face(const DelaunayComplex& dc, std::uint32_t t, int k) {
  const Tet& tv = dc.tetrahedra[t];
  return {tv[kFaceVertices[k][0]], tv[kFaceVertices[k][1]], tv[kFaceVertices[k][2]]};
}

/// Interior faces (t, k) with t < neighbor, in tetrahedron order.
struct InteriorFace {
  std::uint32_t tet;
  int face;
  std::uint32_t neighbor;
};

inline std::vector<InteriorFace> interior_faces(const DelaunayComplex& dc) {
  std::vector<InteriorFace> out;
  for (std::uint32_t t = 0; t < dc.tet_count(); ++t)
    for (int k = 0; k < 4; ++k) {
      const auto u = dc.face_adjacency[t][k];
      if (u != kOutsideHull && t < u) out.push_back({t, k, u});
    }
  return out;
}

/// Sum of S(T) over faces separating INSIDE from OUTSIDE tetrahedra.
inline double labeling_cost(const DelaunayComplex& dc, const Labels& labels,
                            std::span<const PoNQElement> elements, const ExtractionParams& params) {
  std::vector<double> terms;
  for (const auto& f : interior_faces(dc)) {
    const auto a = labels[f.tet], b = labels[f.neighbor];
    if (a == TetLabel::kUnknown || b == TetLabel::kUnknown || a == b) continue;
    terms.push_back(triangle_score(tet_face(dc, f.tet, f.face), elements, params).total);
  }
  return pairwise_sum(terms);
}

/// Completes the labeling by a minimum cut: INSIDE tetrahedra form the
/// source, OUTSIDE the sink, faces touching an UNKNOWN tetrahedron carry
/// capacity S(T). UNKNOWN tetrahedra reachable from the source after the
/// max-flow become INSIDE.
inline Labels mincut_labels(const DelaunayComplex& dc, Labels labels, std::span<const PoNQElement> elements,
                            const ExtractionParams& params) {
  detail::check_elements(dc, elements);
  std::vector<std::uint32_t> node(dc.tet_count(), kOutsideHull);
  std::uint32_t unknown = 0;
  bool any_inside = false;
  for (std::size_t t = 0; t < dc.tet_count(); ++t) {
    if (labels[t] == TetLabel::kUnknown) node[t] = 2 + unknown++;
    any_inside = any_inside || labels[t] == TetLabel::kInside;
  }
  if (unknown == 0) return labels;
  if (!any_inside) fail(ErrorCode::kEmptyInterior, "no tetrahedron is labeled inside");

  constexpr std::uint32_t source = 0, sink = 1;
  auto graph_node = [&](std::uint32_t t) {
    if (labels[t] == TetLabel::kInside) return source;
    if (labels[t] == TetLabel::kOutside) return sink;
    return node[t];
  };

  std::vector<InteriorFace> faces;
  for (const auto& f : interior_faces(dc))
    if (labels[f.tet] == TetLabel::kUnknown || labels[f.neighbor] == TetLabel::kUnknown) faces.push_back(f);
  std::vector<double> cap(faces.size());
  parallel_for(faces.size(), [&](std::size_t i) {
    cap[i] = triangle_score(tet_face(dc, faces[i].tet, faces[i].face), elements, params).total;
  }, 512);

  MaxFlow flow(2 + unknown);
  for (std::size_t i = 0; i < faces.size(); ++i)
    flow.add_edge(graph_node(faces[i].tet), graph_node(faces[i].neighbor), cap[i]);
  // Hull faces only bound tetrahedra that touch a corner, which are already
  // OUTSIDE, so they contribute nothing once the sink is contracted.
  flow.solve(source, sink);
  const auto reach = flow.source_side(source);
  for (std::size_t t = 0; t < dc.tet_count(); ++t)
    if (labels[t] == TetLabel::kUnknown) labels[t] = reach[node[t]] ? TetLabel::kInside : TetLabel::kOutside;
  return labels;
}

/// Interface mesh plus, per mesh vertex, the element it came from.
struct BoundaryMesh {
  TriMesh mesh;
  std::vector<std::uint32_t> element_of_vertex;
};

/// Faces between INSIDE and OUTSIDE tetrahedra (hull faces count as facing
/// OUTSIDE), oriented from INSIDE toward OUTSIDE, on compacted vertices.
inline BoundaryMesh extract_boundary(const DelaunayComplex& dc, const Labels& labels) {
  BoundaryMesh out;
  std::vector<std::uint32_t> remap(dc.vertices.size(), kOutsideHull);
  for (std::uint32_t t = 0; t < dc.tet_count(); ++t) {
    if (labels[t] == TetLabel::kUnknown) fail(ErrorCode::kInvalidInput, "labels are incomplete");
    if (labels[t] != TetLabel::kInside) continue;
    for (int k = 0; k < 4; ++k) {
      const auto u = dc.face_adjacency[t][k];
      if (u != kOutsideHull && labels[u] == TetLabel::kInside) continue;
      Triangle tri;
      const auto f = tet_face(dc, t, k);
      for (int i = 0; i < 3; ++i) {
        auto& r = remap[f[i]];
        if (r == kOutsideHull) {
          r = static_cast<std::uint32_t>(out.mesh.vertices.size());
          out.mesh.vertices.push_back(dc.vertices[f[i]]);
          out.element_of_vertex.push_back(f[i]);
        }
        tri[i] = r;
      }
      out.mesh.triangles.push_back(tri);
    }
  }
  if (out.mesh.triangles.empty()) fail(ErrorCode::kEmptyMesh, "labeling has no boundary face");
  return out;
}

/// Drops triangles whose three vertices all have anisotropy above the
/// threshold; unused vertices are removed.
inline BoundaryMesh cull_open_boundary(const BoundaryMesh& in, std::span<const PoNQElement> elements,
                                       double anisotropy_threshold = kDefaultAnisotropyThreshold) {
  std::vector<char> high(in.mesh.vertices.size());
  for (std::size_t v = 0; v < high.size(); ++v)
    high[v] = anisotropy(elements[in.element_of_vertex[v]].q) > anisotropy_threshold;
  BoundaryMesh out;
  std::vector<std::uint32_t> remap(in.mesh.vertices.size(), kOutsideHull);
  for (const auto& tri : in.mesh.triangles) {
    if (high[tri[0]] && high[tri[1]] && high[tri[2]]) continue;
    Triangle t;
    for (int i = 0; i < 3; ++i) {
      auto& r = remap[tri[i]];
      if (r == kOutsideHull) {
        r = static_cast<std::uint32_t>(out.mesh.vertices.size());
        out.mesh.vertices.push_back(in.mesh.vertices[tri[i]]);
        out.element_of_vertex.push_back(in.element_of_vertex[tri[i]]);
      }
      t[i] = r;
    }
    out.mesh.triangles.push_back(t);
  }
  return out;
}

struct MeshOptions {
  /// Quadric weight; 0 derives it from the median spacing of the vertices.
  double h = 0.0;
  /// 0 selects 4x the median nearest-neighbor distance of the vertices.
  double smallest_edge_threshold = 0.0;
  bool open_surface = false;
  double anisotropy_threshold = kDefaultAnisotropyThreshold;
  /// Quadrics are divided by their largest eigenvalue before scoring.
  bool normalize_quadrics = true;
};

struct MeshResult {
  BoundaryMesh boundary;
  ExtractionParams params;
  std::size_t tet_count = 0;
  std::size_t decided_by_tags = 0;
};

/// Element normals and quadrics prepared for scoring.
inline std::vector<PoNQElement> normalized_elements(std::span<const PoNQElement> elements) {
  std::vector<PoNQElement> out(elements.begin(), elements.end());
  for (auto& e : out)
    if (!detail::is_zero(e.q.A)) e.q = normalize(e.q);
  return out;
}

/// Delaunay, tagging, min-cut and extraction over the elements' optimal vertices.
inline MeshResult mesh_elements(std::span<const PoNQElement> input, const MeshOptions& opt) {
  if (input.empty()) fail(ErrorCode::kInvalidInput, "no elements to mesh");
  const auto elements = opt.normalize_quadrics ? normalized_elements(input)
                                               : std::vector<PoNQElement>(input.begin(), input.end());
  const auto pts = optimal_vertices(elements);
  MeshResult out;
  const double spacing = median_nearest_distance(pts);
  out.params.h = opt.h > 0.0 ? opt.h : (spacing > 0.0 ? 1.0 / (spacing * spacing) : 1.0);
  out.params.smallest_edge_threshold =
      opt.smallest_edge_threshold > 0.0 ? opt.smallest_edge_threshold : kEdgeThresholdFactor * spacing;
  out.params.anisotropy_threshold = opt.anisotropy_threshold;

  const auto dc = tetrahedralize(pts);
  out.tet_count = dc.tet_count();
  auto labels = tag_protective(dc);
  labels = tag_halfspace(dc, elements, std::move(labels));
  labels = tag_smallest_edge(dc, std::move(labels), out.params.smallest_edge_threshold);
  out.decided_by_tags = static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](TetLabel l) { return l != TetLabel::kUnknown; }));
  labels = mincut_labels(dc, std::move(labels), elements, out.params);
  out.boundary = extract_boundary(dc, labels);
  if (opt.open_surface) out.boundary = cull_open_boundary(out.boundary, elements, opt.anisotropy_threshold);
  return out;
}

}  // namespace ponq
