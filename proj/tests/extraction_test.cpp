#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "ponq/maxflow.hpp"
#include "ponq/metrics.hpp"
#include "ponq/pipeline.hpp"
#include "ponq/shapes.hpp"
#include "support.hpp"

using namespace ponq;

namespace {

PoNQElement flat_element(const Vec3& p, const Vec3& n) {
  PoNQElement e;
  e.p = e.v_star = p;
  e.n = n;
  e.q = plane_quadric({p, n});
  e.sample_count = 1;
  return e;
}

struct Fitted {
  std::vector<PoNQElement> elements;  // normalized
  double spacing = 0.0;
};

const Fitted& sphere_fit(int res) {
  static std::map<int, Fitted> cache;
  auto it = cache.find(res);
  if (it != cache.end()) return it->second;
  const auto samples = sample_surface(shapes::icosphere(5), 128 * static_cast<std::size_t>(res) * res, 1);
  FitConfig cfg;
  cfg.grid_res = res;
  const FitResult fit = fit_ponq(samples, cfg);
  Fitted f;
  f.elements = normalized_elements(fit.elements);
  f.spacing = fit.frame.spacing;
  return cache.emplace(res, std::move(f)).first->second;
}

std::size_t count(const Labels& l, TetLabel x) { return static_cast<std::size_t>(std::count(l.begin(), l.end(), x)); }

}  // namespace

TEST(TagProtective, SinglePointAllOutside) {
  const std::vector<Vec3> pts = {{0, 0, 0}};
  const auto dc = tetrahedralize(pts);
  const auto labels = tag_protective(dc);
  EXPECT_EQ(count(labels, TetLabel::kOutside), dc.tet_count());
}

TEST(TagProtective, DenseSphereLeavesUnknown) {
  const auto& f = sphere_fit(16);
  const auto dc = tetrahedralize(optimal_vertices(f.elements));
  const auto labels = tag_protective(dc);
  EXPECT_GT(count(labels, TetLabel::kUnknown), 0u);
  EXPECT_EQ(count(labels, TetLabel::kInside), 0u);
  for (std::size_t t = 0; t < dc.tet_count(); ++t) {
    const bool touches = std::any_of(dc.tetrahedra[t].begin(), dc.tetrahedra[t].end(),
                                     [&](std::uint32_t v) { return dc.is_protective(v); });
    EXPECT_EQ(labels[t] == TetLabel::kOutside, touches);
  }
}

TEST(TagHalfspace, PlaneAboveAndStraddling) {
  // Three points on z = 0 with normal +z, plus one point well above.
  std::vector<PoNQElement> e = {flat_element({0, 0, 0}, {0, 0, 1}), flat_element({1, 0, 0}, {0, 0, 1}),
                                flat_element({0, 1, 0}, {0, 0, 1}), flat_element({0.3, 0.3, 1.0}, {0, 0, 1})};
  const auto dc = tetrahedralize(optimal_vertices(e));
  const Labels labels = tag_protective(dc);
  const auto out = tag_halfspace(dc, e, labels);
  for (std::size_t t = 0; t < dc.tet_count(); ++t) {
    if (labels[t] != TetLabel::kUnknown) continue;
    const Vec3 xc = circumcenter(dc, static_cast<std::uint32_t>(t)), xb = barycenter(dc, static_cast<std::uint32_t>(t));
    bool above = true, below = true;
    for (auto v : dc.tetrahedra[t]) {
      const Vec3 n = e[v].n;
      for (const Vec3& x : {xc, xb}) {
        const double d = dot(n, x - dc.vertices[v]);
        above = above && d > 0;
        below = below && d < 0;
      }
    }
    EXPECT_EQ(out[t] == TetLabel::kOutside, above);
    EXPECT_EQ(out[t] == TetLabel::kInside, below);
  }
}

TEST(TagHalfspace, NeverChangesDecidedLabels) {
  std::mt19937_64 rng(1);
  const auto pts = support::random_points(rng, 60);
  const auto e = support::random_elements(rng, pts);
  const auto dc = tetrahedralize(pts);
  Labels labels(dc.tet_count(), TetLabel::kUnknown);
  for (std::size_t t = 0; t < labels.size(); t += 3) labels[t] = t % 2 ? TetLabel::kInside : TetLabel::kOutside;
  const auto out = tag_halfspace(dc, e, labels);
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (labels[t] != TetLabel::kUnknown) {
      EXPECT_EQ(out[t], labels[t]);
    }
}

TEST(TagHalfspace, SphereLabelsMatchGeometry) {
  const auto& f = sphere_fit(16);
  const auto dc = tetrahedralize(optimal_vertices(f.elements));
  const Labels base = tag_protective(dc);
  const auto labels = tag_halfspace(dc, f.elements, base);
  std::size_t decided = 0, wrong = 0;
  for (std::size_t t = 0; t < dc.tet_count(); ++t) {
    if (base[t] != TetLabel::kUnknown || labels[t] == TetLabel::kUnknown) continue;
    ++decided;
    const double r = norm(barycenter(dc, static_cast<std::uint32_t>(t)));
    wrong += labels[t] == TetLabel::kInside ? r >= 1.0 : r <= 1.0;
  }
  EXPECT_GT(decided, 100u);
  EXPECT_LE(static_cast<double>(wrong), 0.01 * static_cast<double>(decided));
}

TEST(TagSmallestEdge, LabelsMissingSide) {
  std::mt19937_64 rng(2);
  const auto dc = tetrahedralize(support::random_points(rng, 40));
  const auto incident = vertex_tets(dc);
  ASSERT_GE(incident[0].size(), 2u);
  Labels labels(dc.tet_count(), TetLabel::kInside);
  const auto target = incident[0][1];
  labels[target] = TetLabel::kUnknown;
  const auto out = tag_smallest_edge(dc, labels, 1e9);
  EXPECT_EQ(out[target], TetLabel::kOutside);
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (t != target) {
      EXPECT_EQ(out[t], TetLabel::kInside);
    }
  EXPECT_EQ(tag_smallest_edge(dc, labels, shortest_edge(dc, target)), labels);
}

TEST(TagSmallestEdge, SecondPassMakesLessProgress) {
  const auto& f = sphere_fit(16);
  const auto dc = tetrahedralize(optimal_vertices(f.elements));
  const auto protective = tag_protective(dc);
  auto tagged = tag_halfspace(dc, f.elements, protective);
  // Every tenth vertex loses its INSIDE side (its OUTSIDE tets touch the
  // protective corners on a convex shape).
  const auto incident = vertex_tets(dc);
  for (std::uint32_t v = 0; v < dc.input_count; v += 10)
    for (auto t : incident[v])
      if (tagged[t] == TetLabel::kInside) tagged[t] = TetLabel::kUnknown;
  const double thr = default_edge_threshold(f.elements);
  const auto first = tag_smallest_edge(dc, tagged, thr);
  const auto second = tag_smallest_edge(dc, first, thr);
  auto changes = [](const Labels& a, const Labels& b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
    return n;
  };
  EXPECT_GT(changes(tagged, first), 0u);
  EXPECT_LE(changes(first, second), changes(tagged, first));
  for (std::size_t t = 0; t < tagged.size(); ++t)
    if (tagged[t] != TetLabel::kUnknown) {
      EXPECT_EQ(first[t], tagged[t]);
    }
}

TEST(TriangleScore, PerfectFitIsZero) {
  const std::vector<PoNQElement> e = {flat_element({0, 0, 0}, {0, 0, 1}), flat_element({1, 0, 0}, {0, 0, 1}),
                                      flat_element({0, 1, 0}, {0, 0, 1})};
  const auto s = triangle_score({0, 1, 2}, e, {});
  EXPECT_EQ(s.total, 0.0);
  EXPECT_FALSE(s.degenerate);
  // Reversed vertex order flips n_T back to the consensus side.
  EXPECT_EQ(triangle_score({0, 2, 1}, e, {}).total, 0.0);
}

TEST(TriangleScore, OrthogonalNormals) {
  const std::vector<PoNQElement> e = {flat_element({0, 0, 0}, {1, 0, 0}), flat_element({1, 0, 0}, {0, 1, 0}),
                                      flat_element({0, 1, 0}, {1, 0, 0})};
  EXPECT_NEAR(triangle_score({0, 1, 2}, e, {}).s_n, 9.0, 1e-12);
}

TEST(TriangleScore, DegenerateTriangleFlagged) {
  const std::vector<PoNQElement> e = {flat_element({0, 0, 0}, {0, 0, 1}), flat_element({1, 0, 0}, {0, 0, 1}),
                                      flat_element({2, 0, 0}, {0, 0, 1})};
  const auto s = triangle_score({0, 1, 2}, e, {});
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.s_n, 0.0);
}

TEST(TriangleScore, QuadricTermMatchesExpansion) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto e = support::random_elements(rng, support::random_points(rng, 3));
    for (auto& x : e) x.v_star = x.v_star + support::random_points(rng, 1, 0.1)[0];
    ExtractionParams params;
    params.h = 7.5;
    const auto s = triangle_score({0, 1, 2}, e, params);
    double expected = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const auto& A = e[i].q.A;
        const Vec3& v = e[j].v_star;
        double vav = 0.0;
        for (std::size_t r = 0; r < 3; ++r)
          for (std::size_t c = 0; c < 3; ++c) vav += v[r] * A(r, c) * v[c];
        expected += vav - 2.0 * dot(e[i].q.b, v) + e[i].q.c;
      }
    EXPECT_NEAR(s.s_q, expected, 1e-9);
    EXPECT_NEAR(s.total, s.s_n + 7.5 * s.s_q, 1e-9);
    EXPECT_GE(s.s_n, 0.0);
  }
}

TEST(MinCut, ChainCutsCheapestFace) {
  // INSIDE - U1 - U2 - U3 - OUTSIDE with face capacities 5, 1, 5, 5.
  MaxFlow flow(5);
  flow.add_edge(0, 2, 5);
  flow.add_edge(2, 3, 1);
  flow.add_edge(3, 4, 5);
  flow.add_edge(4, 1, 5);
  EXPECT_DOUBLE_EQ(flow.solve(0, 1), 1.0);
  const auto side = flow.source_side(0);
  EXPECT_TRUE(side[2]);
  EXPECT_FALSE(side[3]);
  EXPECT_FALSE(side[4]);
}

TEST(MinCut, NoUnknownIsUnchanged) {
  std::mt19937_64 rng(4);
  auto c = support::random_cut_instance(rng, 20, 0);
  EXPECT_EQ(mincut_labels(c.dc, c.labels, c.elements, {}), c.labels);
}

TEST(MinCut, NoInsideThrows) {
  std::mt19937_64 rng(5);
  auto c = support::random_cut_instance(rng, 20, 3);
  for (auto& l : c.labels)
    if (l == TetLabel::kInside) l = TetLabel::kOutside;
  try {
    mincut_labels(c.dc, c.labels, c.elements, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInterior);
  }
}

TEST(MinCut, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = support::random_cut_instance(rng, 10 + rng() % 20, 1 + rng() % 12);
    ExtractionParams params;
    params.h = 10.0;
    const auto labels = mincut_labels(c.dc, c.labels, c.elements, params);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      ASSERT_NE(labels[t], TetLabel::kUnknown);
      if (c.labels[t] != TetLabel::kUnknown) {
        ASSERT_EQ(labels[t], c.labels[t]);
      }
    }
    EXPECT_EQ(labeling_cost(c.dc, labels, c.elements, params), support::brute_force_cut(c, params));
  }
}

TEST(ExtractBoundary, RejectsIncompleteLabels) {
  std::mt19937_64 rng(7);
  const auto c = support::random_cut_instance(rng, 20, 2);
  EXPECT_THROW(extract_boundary(c.dc, c.labels), Error);
}

TEST(ExtractBoundary, AllOutsideIsEmptyMesh) {
  const std::vector<Vec3> pts = {{0, 0, 0}};
  const auto dc = tetrahedralize(pts);
  try {
    extract_boundary(dc, tag_protective(dc));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMesh);
  }
}

TEST(ExtractBoundary, InteriorRegionIsClosedAndOutward) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = support::random_cut_instance(rng, 50, 0);
    const auto b = extract_boundary(c.dc, c.labels);
    EXPECT_TRUE(check_watertight(b.mesh).watertight);
    EXPECT_GT(signed_volume(b.mesh), 0.0);
    EXPECT_TRUE(check_self_intersection(b.mesh).intersection_free());
    for (std::size_t v = 0; v < b.mesh.vertices.size(); ++v)
      EXPECT_EQ(b.mesh.vertices[v], c.dc.vertices[b.element_of_vertex[v]]);
  }
}

TEST(Pipeline, SphereAtRes32HasSphereTopology) {
  const auto& f = sphere_fit(32);
  MeshOptions opt;
  opt.h = 1.0 / (f.spacing * f.spacing);
  opt.normalize_quadrics = false;
  const auto r = mesh_elements(f.elements, opt);
  EXPECT_EQ(euler_characteristic(r.boundary.mesh), 2);
  EXPECT_TRUE(check_watertight(r.boundary.mesh).watertight);
  EXPECT_TRUE(check_self_intersection(r.boundary.mesh).intersection_free());
  EXPECT_GT(signed_volume(r.boundary.mesh), 0.0);
  EXPECT_LT(r.decided_by_tags, r.tet_count);
}

TEST(Pipeline, ScaleEquivariance) {
  const auto& f = sphere_fit(16);
  auto scaled = f.elements;
  for (auto& e : scaled) {
    e.p = e.p * 2.0;
    e.v_star = e.v_star * 2.0;
    e.q.b = e.q.b * 2.0;
    e.q.c *= 4.0;
  }
  MeshOptions a;
  a.h = 1.0 / (f.spacing * f.spacing);
  a.smallest_edge_threshold = default_edge_threshold(f.elements);
  a.normalize_quadrics = false;
  MeshOptions b = a;
  b.h = a.h / 4.0;
  b.smallest_edge_threshold = 2.0 * a.smallest_edge_threshold;
  const auto ra = mesh_elements(f.elements, a), rb = mesh_elements(scaled, b);
  ASSERT_EQ(ra.boundary.mesh.triangles, rb.boundary.mesh.triangles);
  for (std::size_t v = 0; v < ra.boundary.mesh.vertices.size(); ++v)
    EXPECT_EQ(ra.boundary.mesh.vertices[v] * 2.0, rb.boundary.mesh.vertices[v]);
}

TEST(CullOpenBoundary, FlatCellsKeepClosedMesh) {
  std::mt19937_64 rng(9);
  const auto c = support::random_cut_instance(rng, 40, 0);
  auto flat = c.elements;
  for (auto& e : flat) e.q = plane_quadric({e.p, e.n});
  const auto b = extract_boundary(c.dc, c.labels);
  const auto culled = cull_open_boundary(b, flat, kDefaultAnisotropyThreshold);
  EXPECT_EQ(culled.mesh.triangles, b.mesh.triangles);
  EXPECT_EQ(culled.mesh.vertices, b.mesh.vertices);
}

TEST(CullOpenBoundary, HemisphereOpens) {
  ReconstructOptions opt;
  opt.fit.grid_res = 16;
  opt.samples = 128 * 16 * 16;
  opt.boundary_samples = opt.samples / 8;
  const auto r = reconstruct(shapes::hemisphere(), opt);
  const TriMesh& m = r.mesh.boundary.mesh;
  EXPECT_GE(boundary_loop_count(m), 1u);
  EXPECT_TRUE(check_self_intersection(m).intersection_free());
}
