#pragma once

// Exact geometric predicates on double coordinates. Each predicate first
// evaluates a floating-point filter with a conservative error bound and falls
// back to exact expansion arithmetic (nonoverlapping floating-point
// expansions) when the filter cannot certify the sign.
//
// Conventions:
//   orient3d(a, b, c, d)  = sign det[b - a, c - a, d - a]
//                           > 0 for (0,0,0), (1,0,0), (0,1,0), (0,0,1).
//   in_sphere(a, b, c, d, e) > 0 iff e lies strictly inside the circumsphere
//                           of the positively oriented tetrahedron abcd.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ponq/vec.hpp"

namespace ponq {
namespace exact {

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  y = b - (x - a);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

/// Sum of nonoverlapping components in increasing magnitude, zero-free.
class Expansion {
 public:
  Expansion() = default;
  explicit Expansion(double v) {
    if (v != 0.0) terms_.push_back(v);
  }

  static Expansion difference(double a, double b) {
    double x, y;
    two_sum(a, -b, x, y);
    Expansion e;
    if (y != 0.0) e.terms_.push_back(y);
    if (x != 0.0) e.terms_.push_back(x);
    return e;
  }

  static Expansion product(double a, double b) {
    double x, y;
    two_product(a, b, x, y);
    Expansion e;
    if (y != 0.0) e.terms_.push_back(y);
    if (x != 0.0) e.terms_.push_back(x);
    return e;
  }

  int sign() const {
    if (terms_.empty()) return 0;
    return terms_.back() > 0.0 ? 1 : -1;
  }

  double estimate() const {
    double s = 0.0;
    for (double t : terms_) s += t;
    return s;
  }

  Expansion operator-() const {
    Expansion e = *this;
    for (double& t : e.terms_) t = -t;
    return e;
  }

  friend Expansion operator+(const Expansion& e, const Expansion& f) {
    if (e.terms_.empty()) return f;
    if (f.terms_.empty()) return e;
    Expansion h = e;
    for (double b : f.terms_) h = h.grow(b);
    return h;
  }

  friend Expansion operator-(const Expansion& e, const Expansion& f) { return e + (-f); }

  friend Expansion operator*(const Expansion& e, const Expansion& f) {
    Expansion h;
    for (double b : f.terms_) h = h + e.scale(b);
    return h;
  }

  const std::vector<double>& terms() const { return terms_; }

 private:
  // Shewchuk's GROW-EXPANSION with zero elimination.
  Expansion grow(double b) const {
    Expansion h;
    h.terms_.reserve(terms_.size() + 1);
    double q = b;
    for (double t : terms_) {
      double qn, hh;
      two_sum(q, t, qn, hh);
      q = qn;
      if (hh != 0.0) h.terms_.push_back(hh);
    }
    if (q != 0.0 || h.terms_.empty()) h.terms_.push_back(q);
    if (h.terms_.size() == 1 && h.terms_[0] == 0.0) h.terms_.clear();
    return h;
  }

  // Shewchuk's SCALE-EXPANSION with zero elimination.
  Expansion scale(double b) const {
    Expansion h;
    if (terms_.empty() || b == 0.0) return h;
    h.terms_.reserve(2 * terms_.size());
    double q, hh;
    two_product(terms_[0], b, q, hh);
    if (hh != 0.0) h.terms_.push_back(hh);
    for (std::size_t i = 1; i < terms_.size(); ++i) {
      double p1, p0, s;
      two_product(terms_[i], b, p1, p0);
      two_sum(q, p0, s, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
      fast_two_sum(p1, s, q, hh);
      if (hh != 0.0) h.terms_.push_back(hh);
    }
    if (q != 0.0 || h.terms_.empty()) h.terms_.push_back(q);
    if (h.terms_.size() == 1 && h.terms_[0] == 0.0) h.terms_.clear();
    return h;
  }

  std::vector<double> terms_;
};

inline Expansion det3(const std::array<Expansion, 3>& r0, const std::array<Expansion, 3>& r1,
                      const std::array<Expansion, 3>& r2) {
  return r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0]) +
         r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
}

inline std::array<Expansion, 3> diff(const Vec3& a, const Vec3& b) {
  return {Expansion::difference(a.x, b.x), Expansion::difference(a.y, b.y),
          Expansion::difference(a.z, b.z)};
}

/// Exact det[b - a, c - a, d - a].
inline Expansion orient3d_expansion(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return det3(diff(b, a), diff(c, a), diff(d, a));
}

/// Exact 4x4 determinant with rows (p - e, |p - e|^2) for p = a, b, c, d.
inline Expansion lifted_expansion(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                                  const Vec3& e) {
  const std::array<std::array<Expansion, 3>, 4> r = {diff(a, e), diff(b, e), diff(c, e), diff(d, e)};
  std::array<Expansion, 4> lift;
  for (int i = 0; i < 4; ++i) lift[i] = r[i][0] * r[i][0] + r[i][1] * r[i][1] + r[i][2] * r[i][2];
  // Cofactor expansion along the lift column.
  Expansion det;
  for (int i = 0; i < 4; ++i) {
    std::array<std::array<Expansion, 3>, 3> m;
    int row = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) m[row++] = r[j];
    const Expansion minor = det3(m[0], m[1], m[2]);
    // Position (i, 3): sign (-1)^(i + 3).
    det = (i % 2 == 0) ? det - lift[i] * minor : det + lift[i] * minor;
  }
  return det;
}

}  // namespace exact

namespace detail {
inline constexpr double kEps = std::numeric_limits<double>::epsilon() * 0.5;  // 2^-53
}

/// Sign of det[b - a, c - a, d - a].
inline int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double bx = b.x - a.x, by = b.y - a.y, bz = b.z - a.z;
  const double cx = c.x - a.x, cy = c.y - a.y, cz = c.z - a.z;
  const double dx = d.x - a.x, dy = d.y - a.y, dz = d.z - a.z;
  const double cydz = cy * dz, czdy = cz * dy;
  const double czdx = cz * dx, cxdz = cx * dz;
  const double cxdy = cx * dy, cydx = cy * dx;
  const double det = bx * (cydz - czdy) + by * (czdx - cxdz) + bz * (cxdy - cydx);
  const double permanent = std::abs(bx) * (std::abs(cydz) + std::abs(czdy)) +
                           std::abs(by) * (std::abs(czdx) + std::abs(cxdz)) +
                           std::abs(bz) * (std::abs(cxdy) + std::abs(cydx));
  const double bound = 16.0 * detail::kEps * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return exact::orient3d_expansion(a, b, c, d).sign();
}

/// Sign of the lifted determinant with rows (p - e, |p - e|^2); its sign is
/// negative when e is inside the circumsphere of a positively oriented abcd.
inline int lifted_sign(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const double aex = a.x - e.x, aey = a.y - e.y, aez = a.z - e.z;
  const double bex = b.x - e.x, bey = b.y - e.y, bez = b.z - e.z;
  const double cex = c.x - e.x, cey = c.y - e.y, cez = c.z - e.z;
  const double dex = d.x - e.x, dey = d.y - e.y, dez = d.z - e.z;

  const double aexbey = aex * bey, bexaey = bex * aey;
  const double bexcey = bex * cey, cexbey = cex * bey;
  const double cexdey = cex * dey, dexcey = dex * cey;
  const double dexaey = dex * aey, aexdey = aex * dey;
  const double aexcey = aex * cey, cexaey = cex * aey;
  const double bexdey = bex * dey, dexbey = dex * bey;
  const double ab = aexbey - bexaey, bc = bexcey - cexbey, cd = cexdey - dexcey;
  const double da = dexaey - aexdey, ac = aexcey - cexaey, bd = bexdey - dexbey;
  const double abp = std::abs(aexbey) + std::abs(bexaey), bcp = std::abs(bexcey) + std::abs(cexbey);
  const double cdp = std::abs(cexdey) + std::abs(dexcey), dap = std::abs(dexaey) + std::abs(aexdey);
  const double acp = std::abs(aexcey) + std::abs(cexaey), bdp = std::abs(bexdey) + std::abs(dexbey);

  const double abc = aez * bc - bez * ac + cez * ab;
  const double bcd = bez * cd - cez * bd + dez * bc;
  const double cda = cez * da + dez * ac + aez * cd;
  const double dab = dez * ab + aez * bd + bez * da;
  const double abcp = std::abs(aez) * bcp + std::abs(bez) * acp + std::abs(cez) * abp;
  const double bcdp = std::abs(bez) * cdp + std::abs(cez) * bdp + std::abs(dez) * bcp;
  const double cdap = std::abs(cez) * dap + std::abs(dez) * acp + std::abs(aez) * cdp;
  const double dabp = std::abs(dez) * abp + std::abs(aez) * bdp + std::abs(bez) * dap;

  const double alift = aex * aex + aey * aey + aez * aez;
  const double blift = bex * bex + bey * bey + bez * bez;
  const double clift = cex * cex + cey * cey + cez * cez;
  const double dlift = dex * dex + dey * dey + dez * dez;

  const double det = (dlift * abc - clift * dab) + (blift * cda - alift * bcd);
  const double permanent = dlift * abcp + clift * dabp + blift * cdap + alift * bcdp;
  const double bound = 32.0 * detail::kEps * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return exact::lifted_expansion(a, b, c, d, e).sign();
}

inline int in_sphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  return -lifted_sign(a, b, c, d, e);
}

/// in_sphere with symbolic perturbation: point p is lifted to |p|^2 +
/// eps^rank(p), so cospherical configurations are decided by the ranks
/// (smaller rank = larger perturbation). Never returns 0 when abcd is a
/// non-degenerate tetrahedron and the ranks are distinct.
inline int in_sphere_sos(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e,
                         std::array<std::uint32_t, 5> rank) {
  const int s = lifted_sign(a, b, c, d, e);
  if (s != 0) return -s;

  // Perturbed determinant: D + sum_p delta_p C_p - delta_e sum_p C_p, with
  // C_p the cofactors of the lift column (translated by e).
  const std::array<Vec3, 4> pts = {a, b, c, d};
  std::array<exact::Expansion, 5> coef;
  exact::Expansion total;
  for (int i = 0; i < 4; ++i) {
    std::array<std::array<exact::Expansion, 3>, 3> m;
    int row = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) m[row++] = exact::diff(pts[j], e);
    const exact::Expansion minor = exact::det3(m[0], m[1], m[2]);
    coef[i] = (i % 2 == 0) ? -minor : minor;
    total = total + coef[i];
  }
  coef[4] = -total;

  std::array<int, 5> order = {0, 1, 2, 3, 4};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return rank[x] < rank[y]; });
  for (int k : order) {
    const int sg = coef[k].sign();
    if (sg != 0) return -sg;
  }
  return 0;
}

}  // namespace ponq
