#pragma once

// Optimization-based fitting: generator points are moved by Adam on the
// bi-directional Chamfer distance to the samples, then each generator's
// Voronoi cell contributes a mean normal and a quadric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/mesh.hpp"
#include "ponq/parallel.hpp"
#include "ponq/quadric.hpp"
#include "ponq/random.hpp"
#include "ponq/spatial.hpp"

namespace ponq {

struct PoNQElement {
  Vec3 p;
  Vec3 n;
  Quadric q;
  Vec3 v_star;
  std::uint64_t sample_count = 0;

  friend bool operator==(const PoNQElement&, const PoNQElement&) = default;
};

struct FitConfig {
  int grid_res = 32;
  int epochs = 400;
  /// Adam step size; 0 selects half the grid spacing.
  double learning_rate = 0.0;
  /// The step size decays exponentially to this fraction at the last epoch.
  double lr_final_ratio = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Uniform jitter of the initial generators, in grid cells (seeded).
  double init_jitter = 0.0;
  /// Initialize all res^3 cell centers instead of the sample-occupied ones.
  bool full_grid = false;
  double eps_rank = kDefaultRankEpsilon;
};

/// Axis-aligned cubic grid.
struct GridFrame {
  Vec3 origin;
  double spacing = 1.0;
  int res = 1;

  double extent() const { return spacing * res; }

  std::array<int, 3> cell_coords(const Vec3& x) const {
    std::array<int, 3> c;
    for (int k = 0; k < 3; ++k)
      c[k] = std::clamp(static_cast<int>(std::floor((x[k] - origin[k]) / spacing)), 0, res - 1);
    return c;
  }
  std::size_t cell_of(const Vec3& x) const {
    const auto c = cell_coords(x);
    return (static_cast<std::size_t>(c[2]) * res + c[1]) * res + c[0];
  }
  Vec3 cell_center(std::size_t cell) const {
    const std::size_t i = cell % res, j = (cell / res) % res, k = cell / (static_cast<std::size_t>(res) * res);
    return origin + Vec3{(i + 0.5) * spacing, (j + 0.5) * spacing, (k + 0.5) * spacing};
  }
};

/// Cubic frame centered on the points' bounding box, padded by `margin`
/// of the largest extent on every side.
inline GridFrame frame_around(std::span<const Vec3> points, int res, double margin = 0.05) {
  if (points.empty()) fail(ErrorCode::kInvalidInput, "no points to frame");
  if (res < 1) fail(ErrorCode::kInvalidInput, "grid resolution must be positive");
  Vec3 lo = points[0], hi = lo;
  for (const auto& p : points) {
    lo = cwise_min(lo, p);
    hi = cwise_max(hi, p);
  }
  const Vec3 ext = hi - lo;
  double side = std::max({ext.x, ext.y, ext.z});
  if (!(side > 0.0)) side = 1.0;
  side *= 1.0 + 2.0 * margin;
  GridFrame f;
  f.res = res;
  f.spacing = side / res;
  f.origin = (lo + hi) * 0.5 - Vec3{side, side, side} * 0.5;
  return f;
}

inline GridFrame frame_around(std::span<const SurfaceSample> samples, int res, double margin = 0.05) {
  std::vector<Vec3> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back(s.position);
  return frame_around(std::span<const Vec3>(pts), res, margin);
}

/// Cell centers of the regular res^3 grid over [bbox_min, bbox_max].
inline std::vector<Vec3> init_grid(const Vec3& bbox_min, const Vec3& bbox_max, int res) {
  if (res < 1) fail(ErrorCode::kInvalidInput, "grid resolution must be positive");
  for (int k = 0; k < 3; ++k)
    if (!(bbox_max[k] > bbox_min[k])) fail(ErrorCode::kInvalidInput, "empty bounding box");
  const Vec3 step = (bbox_max - bbox_min) / static_cast<double>(res);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(res) * res * res);
  for (int k = 0; k < res; ++k)
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i)
        out.push_back(bbox_min + Vec3{(i + 0.5) * step.x, (j + 0.5) * step.y, (k + 0.5) * step.z});
  return out;
}

/// Centers of the frame cells that contain at least one sample, in cell order.
inline std::vector<Vec3> init_occupied(const GridFrame& frame, std::span<const SurfaceSample> samples) {
  std::vector<std::size_t> cells;
  cells.reserve(samples.size());
  for (const auto& s : samples) cells.push_back(frame.cell_of(s.position));
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<Vec3> out;
  out.reserve(cells.size());
  for (auto c : cells) out.push_back(frame.cell_center(c));
  return out;
}

namespace detail {

inline std::vector<Vec3> positions(std::span<const SurfaceSample> samples) {
  std::vector<Vec3> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.position);
  return out;
}

inline void require_nonempty(std::size_t p, std::size_t s) {
  if (p == 0 || s == 0) fail(ErrorCode::kInvalidInput, "Chamfer distance needs two non-empty sets");
}

}  // namespace detail

/// Nearest-neighbor assignments in both directions for one Chamfer step.
struct ChamferMatch {
  std::vector<NearestHit> point_to_sample;
  std::vector<NearestHit> sample_to_point;
};

inline ChamferMatch chamfer_match(std::span<const Vec3> P, const KdTree& sample_index,
                                  std::span<const Vec3> S, const ChamferMatch* warm = nullptr) {
  ChamferMatch m;
  m.point_to_sample.resize(P.size());
  m.sample_to_point.resize(S.size());
  const KdTree point_index(P);
  const bool warm_p = warm && warm->point_to_sample.size() == P.size();
  const bool warm_s = warm && warm->sample_to_point.size() == S.size();
  parallel_for(P.size(), [&](std::size_t i) {
    m.point_to_sample[i] = warm_p ? sample_index.nearest(P[i], warm->point_to_sample[i].index)
                                  : sample_index.nearest(P[i]);
  });
  parallel_for(S.size(), [&](std::size_t k) {
    m.sample_to_point[k] = warm_s ? point_index.nearest(S[k], warm->sample_to_point[k].index)
                                  : point_index.nearest(S[k]);
  });
  return m;
}

inline double chamfer_from_match(const ChamferMatch& m) {
  std::vector<double> a(m.point_to_sample.size()), b(m.sample_to_point.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = m.point_to_sample[i].squared_distance;
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = m.sample_to_point[k].squared_distance;
  return pairwise_sum(a) / static_cast<double>(a.size()) +
         pairwise_sum(b) / static_cast<double>(b.size());
}

/// (1/|P|) sum_i min_k |p_i - s_k|^2 + (1/|S|) sum_k min_i |p_i - s_k|^2.
inline double chamfer(std::span<const Vec3> P, std::span<const SurfaceSample> S) {
  detail::require_nonempty(P.size(), S.size());
  const auto pos = detail::positions(S);
  return chamfer_from_match(chamfer_match(P, KdTree(pos), pos));
}

inline double chamfer(std::span<const Vec3> P, std::span<const Vec3> S) {
  detail::require_nonempty(P.size(), S.size());
  return chamfer_from_match(chamfer_match(P, KdTree(S), S));
}

/// Analytic gradient of the Chamfer loss w.r.t. the points, with the
/// nearest-neighbor assignments of `m` held fixed.
inline std::vector<Vec3> chamfer_gradient(std::span<const Vec3> P, std::span<const Vec3> S,
                                          const ChamferMatch& m) {
  std::vector<Vec3> grad(P.size());
  const double wp = 2.0 / static_cast<double>(P.size());
  const double ws = 2.0 / static_cast<double>(S.size());
  parallel_for(P.size(), [&](std::size_t i) {
    grad[i] = (P[i] - S[m.point_to_sample[i].index]) * wp;
  });
  // Sequential scatter in sample order keeps the sums deterministic.
  for (std::size_t k = 0; k < S.size(); ++k) {
    const auto i = m.sample_to_point[k].index;
    grad[i] += (P[i] - S[k]) * ws;
  }
  return grad;
}

/// Adam on the Chamfer loss. Returns the final positions, or P0 itself if
/// the run ended above the starting loss.
inline std::vector<Vec3> optimize_points(std::span<const Vec3> P0, std::span<const SurfaceSample> S,
                                         const FitConfig& cfg,
                                         std::vector<double>* loss_history = nullptr) {
  detail::require_nonempty(P0.size(), S.size());
  if (cfg.epochs < 1) fail(ErrorCode::kInvalidInput, "epochs must be at least 1");
  if (!(cfg.learning_rate > 0.0)) fail(ErrorCode::kInvalidInput, "learning rate must be positive");
  if (!(cfg.lr_final_ratio > 0.0 && cfg.lr_final_ratio <= 1.0))
    fail(ErrorCode::kInvalidInput, "final learning-rate ratio must be in (0, 1]");

  const auto pos = detail::positions(S);
  const KdTree sample_index(pos);
  std::vector<Vec3> P(P0.begin(), P0.end());
  std::vector<Vec3> m1(P.size()), m2(P.size());
  ChamferMatch match;
  double initial_loss = 0.0;
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    match = chamfer_match(P, sample_index, pos, epoch == 0 ? nullptr : &match);
    const double loss = chamfer_from_match(match);
    if (!std::isfinite(loss))
      fail(ErrorCode::kDivergence, "non-finite Chamfer loss at epoch " + std::to_string(epoch));
    if (epoch == 0) initial_loss = loss;
    if (loss_history) loss_history->push_back(loss);

    const auto grad = chamfer_gradient(P, pos, match);
    const double lr = cfg.learning_rate * std::pow(cfg.lr_final_ratio, static_cast<double>(epoch) / cfg.epochs);
    b1t *= cfg.adam_beta1;
    b2t *= cfg.adam_beta2;
    parallel_for(P.size(), [&](std::size_t i) {
      for (int k = 0; k < 3; ++k) {
        const double g = grad[i][k];
        m1[i][k] = cfg.adam_beta1 * m1[i][k] + (1.0 - cfg.adam_beta1) * g;
        m2[i][k] = cfg.adam_beta2 * m2[i][k] + (1.0 - cfg.adam_beta2) * g * g;
        const double mh = m1[i][k] / (1.0 - b1t);
        const double vh = m2[i][k] / (1.0 - b2t);
        P[i][k] -= lr * mh / (std::sqrt(vh) + cfg.adam_eps);
      }
    });
  }

  match = chamfer_match(P, sample_index, pos, &match);
  const double final_loss = chamfer_from_match(match);
  if (!std::isfinite(final_loss))
    fail(ErrorCode::kDivergence, "non-finite Chamfer loss at epoch " + std::to_string(cfg.epochs));
  if (loss_history) loss_history->push_back(final_loss);
  if (final_loss > initial_loss) return {P0.begin(), P0.end()};
  return P;
}

/// Index of the nearest point for every sample (lowest index on ties).
inline std::vector<std::uint32_t> assign_voronoi(std::span<const Vec3> P,
                                                 std::span<const SurfaceSample> S) {
  if (P.empty()) fail(ErrorCode::kInvalidInput, "no generator points");
  const KdTree index(P);
  std::vector<std::uint32_t> out(S.size());
  parallel_for(S.size(), [&](std::size_t k) { out[k] = index.nearest(S[k].position).index; });
  return out;
}

inline constexpr double kDegenerateNormal = 1e-6;

/// Per non-empty Voronoi cell: mean normal, summed plane quadric and its
/// minimizer anchored at the generator. Output follows generator order.
inline std::vector<PoNQElement> accumulate(std::span<const Vec3> P, std::span<const SurfaceSample> S,
                                           std::span<const std::uint32_t> assignment,
                                           double eps_rank = kDefaultRankEpsilon) {
  if (assignment.size() != S.size())
    fail(ErrorCode::kInvalidInput, "assignment does not match the sample count");
  std::vector<Quadric> q(P.size());
  std::vector<Vec3> nsum(P.size());
  std::vector<std::uint64_t> count(P.size(), 0);
  for (std::size_t k = 0; k < S.size(); ++k) {
    const auto i = assignment[k];
    if (i >= P.size()) fail(ErrorCode::kInvalidInput, "assignment index out of range");
    q[i] += plane_quadric({S[k].position, S[k].normal});
    nsum[i] += S[k].normal;
    ++count[i];
  }

  std::vector<std::uint32_t> cells;
  for (std::uint32_t i = 0; i < P.size(); ++i)
    if (count[i] > 0) cells.push_back(i);

  std::vector<PoNQElement> out(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const auto i = cells[c];
    PoNQElement& e = out[c];
    e.p = P[i];
    e.q = q[i];
    e.sample_count = count[i];
    const Vec3 mean = nsum[i] / static_cast<double>(count[i]);
    if (norm(mean) >= kDegenerateNormal) {
      e.n = normalized(mean);
    } else {
      // Opposing normals cancelled: use the sample closest to the generator.
      NearestHit best;
      for (std::uint32_t k = 0; k < S.size(); ++k)
        if (assignment[k] == i) {
          const double d2 = squared_distance(S[k].position, P[i]);
          if (closer(d2, k, best)) best = {k, d2};
        }
      e.n = S[best.index].normal;
    }
    e.v_star = minimizer(e.q, e.p, eps_rank);
  }, 256);
  return out;
}

struct FitResult {
  std::vector<PoNQElement> elements;
  GridFrame frame;
  std::vector<double> loss_history;
};

/// Full optimization path: frame, initial generators, Adam, accumulation.
inline FitResult fit_ponq(std::span<const SurfaceSample> samples, const FitConfig& cfg) {
  FitResult out;
  out.frame = frame_around(samples, cfg.grid_res);
  std::vector<Vec3> P0;
  if (cfg.full_grid) {
    const Vec3 hi = out.frame.origin + Vec3{1, 1, 1} * out.frame.extent();
    P0 = init_grid(out.frame.origin, hi, cfg.grid_res);
  } else {
    P0 = init_occupied(out.frame, samples);
  }
  if (cfg.init_jitter > 0.0) {
    for (std::size_t i = 0; i < P0.size(); ++i) {
      CounterRng rng(cfg.seed, i);
      for (int k = 0; k < 3; ++k)
        P0[i][k] += (rng.uniform() - 0.5) * cfg.init_jitter * out.frame.spacing;
    }
  }
  FitConfig run = cfg;
  if (!(run.learning_rate > 0.0)) run.learning_rate = 0.5 * out.frame.spacing;
  const auto P = optimize_points(P0, samples, run, &out.loss_history);
  out.elements = accumulate(P, samples, assign_voronoi(P, samples), cfg.eps_rank);
  return out;
}

}  // namespace ponq
