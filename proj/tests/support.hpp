#pragma once

// Helpers shared by the test suites and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <numeric>
#include <random>
#include <vector>

#include "ponq/delaunay.hpp"
#include "ponq/extraction.hpp"
#include "ponq/fitting.hpp"
#include "ponq/simplify.hpp"

namespace ponq::support {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return normalized(Vec3{g(rng), g(rng), g(rng)});
}

inline std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double r = 1.0) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

/// Elements at the given points with random normals and a few random planes each.
inline std::vector<PoNQElement> random_elements(std::mt19937_64& rng, const std::vector<Vec3>& pts) {
  std::vector<PoNQElement> out;
  for (const auto& p : pts) {
    PoNQElement e;
    e.p = e.v_star = p;
    e.n = random_unit(rng);
    e.q = plane_quadric({p, e.n});
    for (int k = 0; k < 2; ++k) e.q += plane_quadric({p + random_points(rng, 1, 0.05)[0], random_unit(rng)});
    e.sample_count = 3;
    out.push_back(e);
  }
  return out;
}

/// A labeling problem: protective tets OUTSIDE, `unknown` other tets
/// UNKNOWN, the remaining ones INSIDE.
struct CutInstance {
  DelaunayComplex dc;
  std::vector<PoNQElement> elements;
  Labels labels;
  std::vector<std::uint32_t> unknown;
};

inline CutInstance random_cut_instance(std::mt19937_64& rng, std::size_t points, std::size_t unknown) {
  CutInstance c;
  const auto pts = random_points(rng, points);
  c.dc = tetrahedralize(pts);
  c.elements = random_elements(rng, pts);
  c.labels = tag_protective(c.dc);
  std::vector<std::uint32_t> free;
  for (std::uint32_t t = 0; t < c.dc.tet_count(); ++t)
    if (c.labels[t] == TetLabel::kUnknown) free.push_back(t);
  std::shuffle(free.begin(), free.end(), rng);
  // Keep at least one INSIDE tet.
  const std::size_t k = std::min(unknown, free.empty() ? 0 : free.size() - 1);
  c.unknown.assign(free.begin(), free.begin() + static_cast<std::ptrdiff_t>(k));
  for (std::size_t i = 0; i < free.size(); ++i) c.labels[free[i]] = i < k ? TetLabel::kUnknown : TetLabel::kInside;
  return c;
}

/// Minimum labeling cost over all 2^k completions of the UNKNOWN tets,
/// summed the same way as labeling_cost.
inline double brute_force_cut(const CutInstance& c, const ExtractionParams& params) {
  const auto faces = interior_faces(c.dc);
  std::vector<double> score(faces.size());
  for (std::size_t i = 0; i < faces.size(); ++i)
    score[i] = triangle_score(tet_face(c.dc, faces[i].tet, faces[i].face), c.elements, params).total;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t k = c.unknown.size();
  Labels labels = c.labels;
  std::vector<double> terms;
  for (std::uint64_t mask = 0; mask < (1ull << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i)
      labels[c.unknown[i]] = (mask >> i) & 1 ? TetLabel::kInside : TetLabel::kOutside;
    terms.clear();
    for (std::size_t i = 0; i < faces.size(); ++i)
      if (labels[faces[i].tet] != labels[faces[i].neighbor]) terms.push_back(score[i]);
    best = std::min(best, pairwise_sum(terms));
  }
  return best;
}

/// Total quadric of hierarchy level `level`, recomputed from level 0 by
/// summing each 2x2x2 block in child-slot order.
inline Quadric octree_total(const Hierarchy& h, std::size_t level) {
  using Slots = std::array<std::optional<Quadric>, 8>;
  std::map<std::size_t, Quadric> cur;  // cell index -> quadric
  std::map<std::size_t, std::array<int, 3>> coords;
  const int res0 = h.resolutions[0];
  for (std::size_t i = 0; i < h.levels[0].size(); ++i) {
    const auto& c = h.cells[0][i];
    const std::size_t key = (static_cast<std::size_t>(c[2]) * res0 + c[1]) * res0 + c[0];
    cur[key] = h.levels[0][i].q;
    coords[key] = c;
  }
  for (std::size_t l = 1; l <= level; ++l) {
    const int res = h.resolutions[l];
    std::map<std::size_t, Slots> blocks;
    std::map<std::size_t, std::array<int, 3>> parents;
    for (const auto& [key, q] : cur) {
      const auto& c = coords[key];
      const std::array<int, 3> p = {c[0] / 2, c[1] / 2, c[2] / 2};
      const std::size_t pk = (static_cast<std::size_t>(p[2]) * res + p[1]) * res + p[0];
      blocks[pk][static_cast<std::size_t>((c[0] % 2) + 2 * (c[1] % 2) + 4 * (c[2] % 2))] = q;
      parents[pk] = p;
    }
    cur.clear();
    for (const auto& [pk, slots] : blocks) {
      const auto filled = std::count_if(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); });
      Quadric q;
      if (filled == 1) {
        for (const auto& s : slots)
          if (s) q = *s;
      } else {
        for (const auto& s : slots)
          if (s) q = q + *s;
      }
      cur[pk] = q;
    }
    coords = std::move(parents);
  }
  Quadric total;
  for (const auto& [key, q] : cur) total = total + q;
  return total;
}

}  // namespace ponq::support
