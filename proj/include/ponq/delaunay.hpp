#pragma once

// 3D Delaunay tetrahedralization by incremental insertion (Bowyer-Watson)
// inside the eight corners of an inflated bounding box. Orientation and
// in-sphere tests are exact; cospherical ties are resolved by symbolic
// perturbation keyed on the vertex index, so the result is unique.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/predicates.hpp"
#include "ponq/random.hpp"
#include "ponq/vec.hpp"

namespace ponq {

inline constexpr std::uint32_t kOutsideHull = UINT32_MAX;
inline constexpr double kProtectiveInflation = 0.1;

using Tet = std::array<std::uint32_t, 4>;

/// Vertices of face k (opposite vertex k), ordered so the face normal
/// points out of a positively oriented tetrahedron.
inline constexpr std::array<std::array<int, 3>, 4> kFaceVertices = {{
    {1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

struct DelaunayComplex {
  /// Input points first (index i = input i), then the 8 protective corners.
  std::vector<Vec3> vertices;
  /// Positively oriented tetrahedra.
  std::vector<Tet> tetrahedra;
  /// face_adjacency[t][k]: tetrahedron across the face opposite vertex k,
  /// or kOutsideHull.
  std::vector<Tet> face_adjacency;
  std::vector<bool> protective_flags;
  /// Index of the vertex an exact duplicate input was merged into; the
  /// vertex's own index otherwise.
  std::vector<std::uint32_t> duplicate_of;
  std::size_t input_count = 0;

  std::size_t tet_count() const { return tetrahedra.size(); }
  bool is_protective(std::uint32_t v) const { return protective_flags[v]; }
};

inline Vec3 barycenter(const DelaunayComplex& dc, std::uint32_t t) {
  const auto& tv = dc.tetrahedra[t];
  return (dc.vertices[tv[0]] + dc.vertices[tv[1]] + dc.vertices[tv[2]] + dc.vertices[tv[3]]) / 4.0;
}

inline Vec3 barycenter(const std::array<Vec3, 4>& p) { return (p[0] + p[1] + p[2] + p[3]) / 4.0; }

/// Point equidistant from the four vertices.
inline Vec3 circumcenter(const std::array<Vec3, 4>& p) {
  if (orient3d(p[0], p[1], p[2], p[3]) == 0)
    fail(ErrorCode::kDegenerateSimplex, "circumcenter of a flat tetrahedron");
  const Vec3 d1 = p[1] - p[0], d2 = p[2] - p[0], d3 = p[3] - p[0];
  const Vec3 c23 = cross(d2, d3), c31 = cross(d3, d1), c12 = cross(d1, d2);
  const double denom = 2.0 * dot(d1, c23);
  return p[0] + (c23 * squared_norm(d1) + c31 * squared_norm(d2) + c12 * squared_norm(d3)) / denom;
}

inline Vec3 circumcenter(const DelaunayComplex& dc, std::uint32_t t) {
  const auto& tv = dc.tetrahedra[t];
  return circumcenter({dc.vertices[tv[0]], dc.vertices[tv[1]], dc.vertices[tv[2]], dc.vertices[tv[3]]});
}

namespace detail {

inline std::uint64_t morton_spread(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffull;
  v = (v | v << 16) & 0x1f0000ff0000ffull;
  v = (v | v << 8) & 0x100f00f00f00f00full;
  v = (v | v << 4) & 0x10c30c30c30c30c3ull;
  v = (v | v << 2) & 0x1249249249249249ull;
  return v;
}

class DelaunayBuilder {
 public:
  explicit DelaunayBuilder(DelaunayComplex& dc) : dc_(dc) {}

  void build_corners(std::uint32_t first) {
    // Brute force over the 70 corner quadruples: a tetrahedron belongs to the
    // perturbed Delaunay triangulation iff no other corner is in conflict.
    std::vector<Tet> tets;
    for (std::uint32_t a = 0; a < 8; ++a)
      for (std::uint32_t b = a + 1; b < 8; ++b)
        for (std::uint32_t c = b + 1; c < 8; ++c)
          for (std::uint32_t d = c + 1; d < 8; ++d) {
            Tet t = {first + a, first + b, first + c, first + d};
            const int o = orient(t);
            if (o == 0) continue;
            if (o < 0) std::swap(t[2], t[3]);
            bool empty = true;
            for (std::uint32_t e = 0; e < 8 && empty; ++e) {
              const std::uint32_t v = first + e;
              if (v == t[0] || v == t[1] || v == t[2] || v == t[3]) continue;
              if (conflict(t, v)) empty = false;
            }
            if (empty) tets.push_back(t);
          }
    for (const auto& t : tets) add_tet(t, {kOutsideHull, kOutsideHull, kOutsideHull, kOutsideHull});
    // Adjacency by matching faces.
    for (std::uint32_t i = 0; i < tets_.size(); ++i)
      for (std::uint32_t j = i + 1; j < tets_.size(); ++j)
        for (int fi = 0; fi < 4; ++fi)
          for (int fj = 0; fj < 4; ++fj)
            if (same_face(i, fi, j, fj)) {
              nbr_[i][fi] = j;
              nbr_[j][fj] = i;
            }
  }

  /// Returns false when p duplicates an existing vertex (dup set to it).
  bool insert(std::uint32_t p, std::uint32_t& dup) {
    const std::uint32_t start = locate(p);
    for (int k = 0; k < 4; ++k)
      if (dc_.vertices[tets_[start][k]] == dc_.vertices[p]) {
        dup = tets_[start][k];
        return false;
      }
    if (!conflict(tets_[start], p))
      throw std::logic_error("delaunay: located tetrahedron is not in conflict");

    // Conflict region by flood fill.
    cavity_.clear();
    boundary_.clear();
    cavity_.push_back(start);
    mark_[start] = stamp_ + 1;
    for (std::size_t i = 0; i < cavity_.size(); ++i) {
      const std::uint32_t t = cavity_[i];
      for (int k = 0; k < 4; ++k) {
        const std::uint32_t n = nbr_[t][k];
        if (n != kOutsideHull && mark_[n] == stamp_ + 1) continue;
        if (n != kOutsideHull && mark_[n] != stamp_ + 2 && conflict(tets_[n], p)) {
          mark_[n] = stamp_ + 1;
          cavity_.push_back(n);
        } else {
          if (n != kOutsideHull) mark_[n] = stamp_ + 2;
          boundary_.push_back({t, k});
        }
      }
    }
    // A neighbor marked "not in conflict" may be reached again from another
    // cavity tetrahedron; the stamp keeps the in-sphere test to one call.
    stamp_ += 2;

    // One new tetrahedron per cavity boundary face.
    new_tets_.clear();
    for (const auto& [t, k] : boundary_) {
      Tet nt = tets_[t];
      nt[k] = p;
      Tet nn = {kOutsideHull, kOutsideHull, kOutsideHull, kOutsideHull};
      const std::uint32_t outer = nbr_[t][k];
      nn[k] = outer;
      int outer_face = -1;
      if (outer != kOutsideHull)
        for (int j = 0; j < 4; ++j)
          if (nbr_[outer][j] == t) outer_face = j;
      new_tets_.push_back({nt, nn, outer, outer_face});
    }
    for (auto t : cavity_) release(t);
    std::vector<std::uint32_t> ids;
    ids.reserve(new_tets_.size());
    for (auto& nt : new_tets_) {
      const std::uint32_t id = add_tet(nt.verts, nt.nbrs);
      ids.push_back(id);
      if (nt.outer != kOutsideHull) nbr_[nt.outer][nt.outer_face] = id;
    }
    // Link new tetrahedra across the faces that contain p.
    links_.clear();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Tet& tv = tets_[ids[i]];
      for (int k = 0; k < 4; ++k) {
        if (tv[k] == p) continue;
        std::uint32_t a = UINT32_MAX, b = UINT32_MAX;
        for (int j = 0; j < 4; ++j) {
          if (j == k || tv[j] == p) continue;
          (a == UINT32_MAX ? a : b) = tv[j];
        }
        if (a > b) std::swap(a, b);
        links_.push_back({(static_cast<std::uint64_t>(a) << 32) | b, ids[i], k});
      }
    }
    std::sort(links_.begin(), links_.end(),
              [](const Link& x, const Link& y) { return x.key < y.key; });
    for (std::size_t i = 0; i + 1 < links_.size(); i += 2) {
      if (links_[i].key != links_[i + 1].key)
        throw std::logic_error("delaunay: unmatched cavity face");
      nbr_[links_[i].tet][links_[i].face] = links_[i + 1].tet;
      nbr_[links_[i + 1].tet][links_[i + 1].face] = links_[i].tet;
    }
    last_ = ids.back();
    return true;
  }

  void finish() {
    std::vector<std::uint32_t> remap(tets_.size(), kOutsideHull);
    std::uint32_t n = 0;
    for (std::uint32_t t = 0; t < tets_.size(); ++t)
      if (alive_[t]) remap[t] = n++;
    dc_.tetrahedra.clear();
    dc_.face_adjacency.clear();
    dc_.tetrahedra.reserve(n);
    dc_.face_adjacency.reserve(n);
    for (std::uint32_t t = 0; t < tets_.size(); ++t) {
      if (!alive_[t]) continue;
      dc_.tetrahedra.push_back(tets_[t]);
      Tet adj;
      for (int k = 0; k < 4; ++k) adj[k] = nbr_[t][k] == kOutsideHull ? kOutsideHull : remap[nbr_[t][k]];
      dc_.face_adjacency.push_back(adj);
    }
  }

 private:
  struct NewTet {
    Tet verts;
    Tet nbrs;
    std::uint32_t outer;
    int outer_face;
  };
  struct Link {
    std::uint64_t key;
    std::uint32_t tet;
    int face;
  };

  int orient(const Tet& t) const {
    const auto& v = dc_.vertices;
    return orient3d(v[t[0]], v[t[1]], v[t[2]], v[t[3]]);
  }

  bool conflict(const Tet& t, std::uint32_t p) const {
    const auto& v = dc_.vertices;
    return in_sphere_sos(v[t[0]], v[t[1]], v[t[2]], v[t[3]], v[p], {t[0], t[1], t[2], t[3], p}) > 0;
  }

  bool same_face(std::uint32_t i, int fi, std::uint32_t j, int fj) const {
    std::array<std::uint32_t, 3> a, b;
    for (int k = 0; k < 3; ++k) {
      a[k] = tets_[i][kFaceVertices[fi][k]];
      b[k] = tets_[j][kFaceVertices[fj][k]];
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
  }

  std::uint32_t add_tet(const Tet& t, const Tet& n) {
    std::uint32_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      tets_[id] = t;
      nbr_[id] = n;
      alive_[id] = 1;
      mark_[id] = 0;
    } else {
      id = static_cast<std::uint32_t>(tets_.size());
      tets_.push_back(t);
      nbr_.push_back(n);
      alive_.push_back(1);
      mark_.push_back(0);
    }
    return id;
  }

  void release(std::uint32_t t) {
    alive_[t] = 0;
    free_.push_back(t);
  }

  // Visibility walk with a randomized face order; falls back to a scan if
  // the step budget runs out.
  std::uint32_t locate(std::uint32_t p) {
    const auto& v = dc_.vertices;
  
    std::uint32_t t = last_;
    if (t >= tets_.size() || !alive_[t]) {
      t = 0;
      while (!alive_[t]) ++t;
    }
    const std::size_t budget = 64 + 4 * tets_.size();
    for (std::size_t step = 0; step < budget; ++step) {
      const int r = static_cast<int>(mix64(++walk_counter_) & 3);
      bool moved = false;
      for (int i = 0; i < 4 && !moved; ++i) {
        const int k = (r + i) & 3;
        Tet probe = tets_[t];
        probe[k] = p;
        if (orient3d(v[probe[0]], v[probe[1]], v[probe[2]], v[probe[3]]) < 0) {
          if (nbr_[t][k] == kOutsideHull) throw std::logic_error("delaunay: point outside the hull");
          t = nbr_[t][k];
          moved = true;
        }
      }
      if (!moved) return t;
    }
    for (std::uint32_t s = 0; s < tets_.size(); ++s) {
      if (!alive_[s]) continue;
      bool inside = true;
      for (int k = 0; k < 4 && inside; ++k) {
        Tet probe = tets_[s];
        probe[k] = p;
        inside = orient3d(v[probe[0]], v[probe[1]], v[probe[2]], v[probe[3]]) >= 0;
      }
      if (inside) return s;
    }
    throw std::logic_error("delaunay: point location failed");
  }

  DelaunayComplex& dc_;
  std::vector<Tet> tets_;
  std::vector<Tet> nbr_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> mark_;
  std::vector<std::uint32_t> free_;
  std::uint32_t stamp_ = 0;
  std::uint32_t last_ = 0;
  std::uint64_t walk_counter_ = 0;
  std::vector<std::uint32_t> cavity_;
  std::vector<std::pair<std::uint32_t, int>> boundary_;
  std::vector<NewTet> new_tets_;
  std::vector<Link> links_;
};

}  // namespace detail

/// Delaunay tetrahedralization of the points plus the 8 corners of their
/// bounding box inflated by 10% per axis (at least 1e-3 of the largest
/// extent, or 1, along flat axes).
inline DelaunayComplex tetrahedralize(std::span<const Vec3> points) {
  if (points.empty()) fail(ErrorCode::kInvalidInput, "tetrahedralization needs at least one point");
  Vec3 lo = points[0], hi = lo;
  for (const auto& p : points) {
    for (int k = 0; k < 3; ++k)
      if (!std::isfinite(p[k])) fail(ErrorCode::kInvalidInput, "non-finite input point");
    lo = cwise_min(lo, p);
    hi = cwise_max(hi, p);
  }
  const Vec3 ext = hi - lo;
  const double largest = std::max({ext.x, ext.y, ext.z});
  Vec3 pad;
  for (int k = 0; k < 3; ++k) {
    pad[k] = kProtectiveInflation * ext[k];
    if (!(pad[k] > 1e-3 * largest)) pad[k] = largest > 0.0 ? 1e-3 * largest : 1.0;
  }
  lo -= pad;
  hi += pad;

  DelaunayComplex dc;
  dc.input_count = points.size();
  dc.vertices.assign(points.begin(), points.end());
  const auto first_corner = static_cast<std::uint32_t>(points.size());
  for (int c = 0; c < 8; ++c)
    dc.vertices.push_back({(c & 1) ? hi.x : lo.x, (c & 2) ? hi.y : lo.y, (c & 4) ? hi.z : lo.z});
  dc.protective_flags.assign(dc.vertices.size(), false);
  for (int c = 0; c < 8; ++c) dc.protective_flags[first_corner + c] = true;
  dc.duplicate_of.resize(dc.vertices.size());
  std::iota(dc.duplicate_of.begin(), dc.duplicate_of.end(), 0u);

  // Spatially coherent insertion order (Morton).
  std::vector<std::pair<std::uint64_t, std::uint32_t>> order;
  order.reserve(points.size());
  const Vec3 span = hi - lo;
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    std::uint64_t key = 0;
    for (int k = 0; k < 3; ++k) {
      const double u = (points[i][k] - lo[k]) / span[k];
      key |= detail::morton_spread(static_cast<std::uint64_t>(u * 2097151.0)) << k;
    }
    order.push_back({key, i});
  }
  std::sort(order.begin(), order.end());

  detail::DelaunayBuilder builder(dc);
  builder.build_corners(first_corner);
  for (const auto& [key, i] : order) {
    std::uint32_t dup = i;
    if (!builder.insert(i, dup)) dc.duplicate_of[i] = dup;
  }
  builder.finish();
  return dc;
}

}  // namespace ponq
