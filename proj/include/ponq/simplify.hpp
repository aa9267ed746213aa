#pragma once

// PoNQ-lite: elements sharing a cell are merged by summing their quadrics,
// and a power-of-two hierarchy is built by merging 2x2x2 blocks of cells.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ponq/error.hpp"
#include "ponq/fitting.hpp"
#include "ponq/quadric.hpp"
#include "ponq/spatial.hpp"

namespace ponq {

namespace detail {

inline PoNQElement pool_group(std::span<const PoNQElement> elements, std::span<const std::uint32_t> members,
                              double eps_rank) {
  if (members.size() == 1) return elements[members[0]];
  PoNQElement out;
  Vec3 psum, nsum;
  double weight = 0.0;
  for (auto i : members) {
    const auto& e = elements[i];
    const double w = static_cast<double>(e.sample_count);
    out.q += e.q;
    psum += e.p * w;
    nsum += e.n * w;
    weight += w;
    out.sample_count += e.sample_count;
  }
  if (weight > 0.0) {
    out.p = psum / weight;
  } else {
    for (auto i : members) out.p += elements[i].p;
    out.p /= static_cast<double>(members.size());
  }
  if (weight > 0.0 && norm(nsum / weight) >= kDegenerateNormal) {
    out.n = normalized(nsum);
  } else {
    // Opposing normals cancelled: take the member closest to the pooled point.
    NearestHit best;
    for (auto i : members) {
      const double d2 = squared_distance(elements[i].p, out.p);
      if (closer(d2, i, best)) best = {i, d2};
    }
    out.n = elements[best.index].n;
  }
  out.v_star = minimizer(out.q, out.p, eps_rank);
  return out;
}

}  // namespace detail

/// Merges the elements of each cell. Quadrics are summed in input order;
/// output is in increasing cell order. A cell with one element keeps it as is.
inline std::vector<PoNQElement> pool_elements(std::span<const PoNQElement> elements,
                                              std::span<const std::size_t> cell_of,
                                              double eps_rank = kDefaultRankEpsilon) {
  if (cell_of.size() != elements.size()) fail(ErrorCode::kInvalidInput, "cell map does not match the elements");
  std::vector<std::uint32_t> order(elements.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return cell_of[a] < cell_of[b]; });
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end) in order
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && cell_of[order[j]] == cell_of[order[i]]) ++j;
    groups.push_back({i, j});
    i = j;
  }
  std::vector<PoNQElement> out(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    const auto [b, e] = groups[g];
    out[g] = detail::pool_group(elements, std::span<const std::uint32_t>(order).subspan(b, e - b), eps_rank);
  }, 256);
  return out;
}

/// One set of elements per level and their integer cell coordinates.
struct Hierarchy {
  std::vector<std::vector<PoNQElement>> levels;
  std::vector<std::vector<std::array<int, 3>>> cells;
  std::vector<int> resolutions;
};

/// Slot of a cell inside its parent 2x2x2 block.
inline int child_slot(const std::array<int, 3>& c) { return (c[0] & 1) | (c[1] & 1) << 1 | (c[2] & 1) << 2; }

/// Level 0 merges the elements sharing a cell of `frame`; level l merges the
/// 2x2x2 blocks of level l-1, summing children in slot order. Levels are
/// returned finest first.
inline Hierarchy coarsen_grid(std::span<const PoNQElement> elements, const GridFrame& frame, int levels,
                              double eps_rank = kDefaultRankEpsilon) {
  if (levels < 1) fail(ErrorCode::kInvalidInput, "at least one level is required");
  if (levels > 30 || frame.res % (1 << levels) != 0)
    fail(ErrorCode::kInvalidInput, "grid resolution " + std::to_string(frame.res) + " is not divisible by 2^" +
                                       std::to_string(levels));
  Hierarchy h;
  {
    std::vector<std::size_t> cell(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) cell[i] = frame.cell_of(elements[i].p);
    h.levels.push_back(pool_elements(elements, cell, eps_rank));
    std::vector<std::size_t> uniq(cell);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<std::array<int, 3>> coords;
    for (auto c : uniq)
      coords.push_back({static_cast<int>(c % frame.res), static_cast<int>(c / frame.res % frame.res),
                        static_cast<int>(c / (static_cast<std::size_t>(frame.res) * frame.res))});
    h.cells.push_back(std::move(coords));
    h.resolutions.push_back(frame.res);
  }
  for (int l = 1; l <= levels; ++l) {
    const auto& prev = h.levels.back();
    const auto& pc = h.cells.back();
    const int res = h.resolutions.back() / 2;
    std::vector<std::uint32_t> order(prev.size());
    std::iota(order.begin(), order.end(), 0u);
    auto parent_index = [&](const std::array<int, 3>& c) {
      return (static_cast<std::size_t>(c[2] >> 1) * res + (c[1] >> 1)) * res + (c[0] >> 1);
    };
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const auto pa = parent_index(pc[a]), pb = parent_index(pc[b]);
      return pa != pb ? pa < pb : child_slot(pc[a]) < child_slot(pc[b]);
    });
    std::vector<PoNQElement> sorted;
    std::vector<std::size_t> cell;
    std::vector<std::array<int, 3>> coords;
    for (auto i : order) {
      sorted.push_back(prev[i]);
      cell.push_back(parent_index(pc[i]));
      const std::array<int, 3> parent = {pc[i][0] >> 1, pc[i][1] >> 1, pc[i][2] >> 1};
      if (coords.empty() || coords.back() != parent) coords.push_back(parent);
    }
    h.levels.push_back(pool_elements(sorted, cell, eps_rank));
    h.cells.push_back(std::move(coords));
    h.resolutions.push_back(res);
  }
  return h;
}

/// Hierarchy over a frame recovered from the elements' generator points.
inline Hierarchy coarsen_grid(std::span<const PoNQElement> elements, int grid_res, int levels,
                              double eps_rank = kDefaultRankEpsilon) {
  if (elements.empty()) fail(ErrorCode::kInvalidInput, "no elements to coarsen");
  std::vector<Vec3> pts;
  pts.reserve(elements.size());
  for (const auto& e : elements) pts.push_back(e.p);
  return coarsen_grid(elements, frame_around(std::span<const Vec3>(pts), grid_res), levels, eps_rank);
}

/// Component sums of the quadrics, in element order.
inline Quadric total_quadric(std::span<const PoNQElement> elements) {
  Quadric q;
  for (const auto& e : elements) q += e.q;
  return q;
}

}  // namespace ponq
