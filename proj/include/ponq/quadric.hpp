#pragma once

// Quadric error metric algebra. A Quadric (A, b, c) encodes the sum of
// squared distances to a set of planes:
//
//   QEM(x) = x^T A x - 2 b^T x + c
//
// Each oriented plane (s, n) contributes A = n n^T, b = A s, c = s^T A s.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ponq/error.hpp"
#include "ponq/vec.hpp"

namespace ponq {

struct PlaneConstraint {
  Vec3 point;
  Vec3 normal;
};

struct Quadric {
  Mat3 A;
  Vec3 b;
  double c = 0.0;

  Quadric& operator+=(const Quadric& o) {
    A += o.A;
    b += o.b;
    c += o.c;
    return *this;
  }
  friend Quadric operator+(Quadric l, const Quadric& r) { return l += r; }
  friend bool operator==(const Quadric&, const Quadric&) = default;
};

inline constexpr double kUnitNormalTolerance = 1e-9;
inline constexpr double kDefaultRankEpsilon = 1e-3;

inline Quadric plane_quadric(const PlaneConstraint& pc) {
  const double len = norm(pc.normal);
  if (!(std::abs(len - 1.0) <= kUnitNormalTolerance))
    fail(ErrorCode::kInvalidInput,
         "plane normal is not unit length (|n| = " + std::to_string(len) + ")");
  Quadric q;
  q.A = outer(pc.normal, pc.normal);
  q.b = q.A * pc.point;
  q.c = dot(pc.point, q.b);
  return q;
}

inline Quadric sum(const Quadric& q1, const Quadric& q2) { return q1 + q2; }

inline double evaluate(const Quadric& q, const Vec3& x) {
  return dot(x, q.A * x) - 2.0 * dot(q.b, x) + q.c;
}

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues descending.
struct SymmetricEigen {
  std::array<double, 3> values{};
  std::array<Vec3, 3> vectors{};
};

/// Cyclic Jacobi rotations until the off-diagonal norm falls below
/// 1e-12 of the matrix norm.
inline SymmetricEigen eigen_decompose(const Mat3& input) {
  double a[3][3];
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  double total = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      // Symmetrize: callers pass sums of outer products, which are symmetric
      // up to rounding.
      a[r][c] = 0.5 * (input(r, c) + input(c, r));
      total += a[r][c] * a[r][c];
    }
  const double tol = 1e-12 * std::sqrt(total);

  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]));
    if (off <= tol) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = cs * akp - sn * akq;
          a[k][q] = sn * akp + cs * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = cs * apk - sn * aqk;
          a[q][k] = sn * apk + cs * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = cs * vkp - sn * vkq;
          v[k][q] = sn * vkp + cs * vkq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
  SymmetricEigen out;
  for (int k = 0; k < 3; ++k) {
    const int i = order[k];
    out.values[k] = a[i][i];
    out.vectors[k] = {v[0][i], v[1][i], v[2][i]};
  }
  return out;
}

namespace detail {

inline bool is_zero(const Mat3& m) {
  return std::all_of(m.m.begin(), m.m.end(), [](double v) { return v == 0.0; });
}

// Gaussian elimination with partial pivoting; A is assumed well conditioned.
inline Vec3 solve3(const Mat3& A, const Vec3& rhs) {
  double m[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r][c] = A(r, c);
    m[r][3] = rhs[r];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (piv != col)
      for (int c = 0; c < 4; ++c) std::swap(m[col][c], m[piv][c]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  Vec3 x;
  for (int r = 2; r >= 0; --r) {
    double s = m[r][3];
    for (int c = r + 1; c < 3; ++c) s -= m[r][c] * x[c];
    x[r] = s / m[r][r];
  }
  return x;
}

}  // namespace detail

/// Minimizer of the quadric. Full-rank quadrics (lambda_min / lambda_max >=
/// eps_rank) are solved exactly; otherwise the minimum is taken over the
/// well-conditioned eigen-subspace through `anchor`, so flat or
/// edge-like quadrics keep the anchor's position along their null directions.
inline Vec3 minimizer(const Quadric& q, const Vec3& anchor,
                      double eps_rank = kDefaultRankEpsilon) {
  if (detail::is_zero(q.A))
    fail(ErrorCode::kDegenerateQuadric, "quadric has an identically zero A matrix");
  const SymmetricEigen eig = eigen_decompose(q.A);
  const double lmax = eig.values[0];
  if (!(lmax > 0.0))
    fail(ErrorCode::kDegenerateQuadric, "quadric has no positive eigenvalue");
  if (eig.values[2] / lmax >= eps_rank) return detail::solve3(q.A, q.b);

  const Vec3 residual = q.b - q.A * anchor;
  Vec3 v = anchor;
  for (int k = 0; k < 3; ++k) {
    if (eig.values[k] < eps_rank * lmax) break;
    v += eig.vectors[k] * (dot(eig.vectors[k], residual) / eig.values[k]);
  }
  return v;
}

/// QEM value at the minimizer, c - b^T v.
inline double residual_at_minimizer(const Quadric& q, const Vec3& v) {
  return q.c - dot(q.b, v);
}

inline double largest_eigenvalue(const Quadric& q) {
  return eigen_decompose(q.A).values[0];
}

/// Divides (A, b, c) by the largest eigenvalue of A.
inline Quadric normalize(const Quadric& q) {
  if (detail::is_zero(q.A))
    fail(ErrorCode::kDegenerateQuadric, "cannot normalize a zero quadric");
  const double lmax = largest_eigenvalue(q);
  Quadric out = q;
  out.A /= lmax;
  out.b /= lmax;
  out.c /= lmax;
  return out;
}

/// Ratio lambda_2 / lambda_1 of the two largest eigenvalues of A.
inline double anisotropy(const Quadric& q) {
  if (detail::is_zero(q.A))
    fail(ErrorCode::kDegenerateQuadric, "anisotropy of a zero quadric");
  const SymmetricEigen eig = eigen_decompose(q.A);
  return std::clamp(eig.values[1] / eig.values[0], 0.0, 1.0);
}

}  // namespace ponq
