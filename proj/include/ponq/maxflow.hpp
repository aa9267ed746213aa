#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace ponq {

/// Dinic max-flow on an undirected capacitated graph.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t node_count) : head_(node_count, -1), level_(node_count), it_(node_count) {}

  std::size_t node_count() const { return head_.size(); }

  /// Undirected edge: capacity `cap` in both directions.
  void add_edge(std::uint32_t u, std::uint32_t v, double cap) {
    if (u == v || !(cap > 0.0)) return;
    push(u, v, cap);
    push(v, u, cap);
    max_cap_ = std::max(max_cap_, cap);
  }

  double solve(std::uint32_t s, std::uint32_t t) {
    const double eps = 1e-13 * max_cap_;
    double flow = 0.0;
    while (bfs(s, t, eps)) {
      for (std::size_t i = 0; i < head_.size(); ++i) it_[i] = head_[i];
      for (;;) {
        const double f = dfs(s, t, std::numeric_limits<double>::infinity(), eps);
        if (!(f > 0.0)) break;
        flow += f;
      }
    }
    eps_ = eps;
    return flow;
  }

  /// Nodes reachable from s in the final residual graph.
  std::vector<bool> source_side(std::uint32_t s) const {
    std::vector<bool> seen(head_.size(), false);
    std::vector<std::uint32_t> stack = {s};
    seen[s] = true;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (int e = head_[u]; e >= 0; e = edges_[e].next)
        if (edges_[e].cap > eps_ && !seen[edges_[e].to]) {
          seen[edges_[e].to] = true;
          stack.push_back(edges_[e].to);
        }
    }
    return seen;
  }

 private:
  struct Edge {
    std::uint32_t to;
    int next;
    double cap;  // residual
  };

  void push(std::uint32_t u, std::uint32_t v, double cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size() - 1);
  }

  bool bfs(std::uint32_t s, std::uint32_t t, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::uint32_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (int e = head_[u]; e >= 0; e = edges_[e].next)
        if (edges_[e].cap > eps && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  // Iterative augmenting-path search in the level graph.
  double dfs(std::uint32_t s, std::uint32_t t, double limit, double eps) {
    path_.clear();
    std::uint32_t u = s;
    while (true) {
      if (u == t) {
        double f = limit;
        for (int e : path_) f = std::min(f, edges_[e].cap);
        for (int e : path_) {
          edges_[e].cap -= f;
          edges_[e ^ 1].cap += f;
        }
        return f;
      }
      int& e = it_[u];
      while (e >= 0 && !(edges_[e].cap > eps && level_[edges_[e].to] == level_[u] + 1)) e = edges_[e].next;
      if (e >= 0) {
        path_.push_back(e);
        u = edges_[e].to;
        continue;
      }
      // Dead end: retreat.
      level_[u] = -1;
      if (path_.empty()) return 0.0;
      const int back = path_.back();
      path_.pop_back();
      u = edges_[back ^ 1].to;
      it_[u] = edges_[it_[u]].next;
    }
  }

  std::vector<int> head_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<int> it_;
  std::vector<int> path_;
  double max_cap_ = 0.0;
  double eps_ = 0.0;
};

}  // namespace ponq
