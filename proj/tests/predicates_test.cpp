#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "ponq/predicates.hpp"

using namespace ponq;

namespace {

__extension__ typedef __int128 i128;

// Points 0.5 + k * 2^-53: close enough to collide in floating point, while
// their offsets from any base point are small exact integers.
constexpr double kUlp = 0x1.0p-53;

Vec3 grid_point(const std::array<int, 3>& k) { return {0.5 + k[0] * kUlp, 0.5 + k[1] * kUlp, 0.5 + k[2] * kUlp}; }

int sign(i128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

i128 det3(const std::array<std::array<i128, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

int exact_orient(const std::array<std::array<int, 3>, 4>& k) {
  std::array<std::array<i128, 3>, 3> m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = k[r + 1][c] - k[0][c];
  return sign(det3(m));
}

// Sign of det[(p - e, |p - e|^2)] over p = a, b, c, d.
int exact_lifted(const std::array<std::array<int, 3>, 5>& k) {
  std::array<std::array<i128, 4>, 4> m;
  for (int r = 0; r < 4; ++r) {
    i128 lift = 0;
    for (int c = 0; c < 3; ++c) {
      m[r][c] = k[r][c] - k[4][c];
      lift += m[r][c] * m[r][c];
    }
    m[r][3] = lift;
  }
  i128 det = 0;
  for (int col = 0; col < 4; ++col) {
    std::array<std::array<i128, 3>, 3> minor;
    for (int r = 1; r < 4; ++r) {
      int cc = 0;
      for (int c = 0; c < 4; ++c)
        if (c != col) minor[r - 1][cc++] = m[r][c];
    }
    det += (col % 2 ? -1 : 1) * m[0][col] * det3(minor);
  }
  return sign(det);
}

}  // namespace

TEST(Orient3d, UnitTetIsPositive) {
  EXPECT_EQ(orient3d({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}), 1);
  EXPECT_EQ(orient3d({0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {0, 0, 1}), -1);
  EXPECT_EQ(orient3d({0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}), 0);
}

TEST(Orient3d, NearDegenerateMatchesExactOracle) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> u(-8, 8);
  int zeros = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    std::array<std::array<int, 3>, 4> k;
    for (auto& p : k)
      for (auto& c : p) c = u(rng);
    const int s = orient3d(grid_point(k[0]), grid_point(k[1]), grid_point(k[2]), grid_point(k[3]));
    ASSERT_EQ(s, exact_orient(k));
    zeros += s == 0;
  }
  EXPECT_GT(zeros, 0);
}

TEST(InSphere, Basic) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0}, d{0, 0, 1};
  EXPECT_EQ(in_sphere(a, b, c, d, {0.25, 0.25, 0.25}), 1);
  EXPECT_EQ(in_sphere(a, b, c, d, {2, 2, 2}), -1);
  EXPECT_EQ(in_sphere(a, b, c, d, {1, 1, 1}), 0);
}

TEST(InSphere, NearDegenerateMatchesExactOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(-6, 6);
  int zeros = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    std::array<std::array<int, 3>, 5> k;
    for (auto& p : k)
      for (auto& c : p) c = u(rng);
    const int s = lifted_sign(grid_point(k[0]), grid_point(k[1]), grid_point(k[2]), grid_point(k[3]),
                              grid_point(k[4]));
    ASSERT_EQ(s, exact_lifted(k));
    zeros += s == 0;
  }
  EXPECT_GT(zeros, 0);
}

TEST(InSphere, RandomMatchesExactOracleOnIntegers) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(-1000, 1000);
  for (int trial = 0; trial < 20000; ++trial) {
    std::array<std::array<int, 3>, 5> k;
    std::array<Vec3, 5> p;
    for (int i = 0; i < 5; ++i) {
      for (auto& c : k[i]) c = u(rng);
      p[i] = {double(k[i][0]), double(k[i][1]), double(k[i][2])};
    }
    ASSERT_EQ(lifted_sign(p[0], p[1], p[2], p[3], p[4]), exact_lifted(k));
  }
}

TEST(InSphereSos, CosphericalIsNeverZero) {
  // Cube corners are cospherical.
  std::array<Vec3, 8> c;
  for (int i = 0; i < 8; ++i) c[i] = {double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)};
  const Vec3 a = c[0], b = c[1], cc = c[2], d = c[4];
  ASSERT_EQ(orient3d(a, b, cc, d), 1);
  for (int e : {3, 5, 6, 7}) {
    EXPECT_EQ(in_sphere(a, b, cc, d, c[e]), 0);
    EXPECT_NE(in_sphere_sos(a, b, cc, d, c[e], {0, 1, 2, 4, std::uint32_t(e)}), 0);
  }
}

TEST(InSphereSos, AgreesWithExactWhenNonDegenerate) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::array<Vec3, 5> p;
    for (auto& x : p) x = {u(rng), u(rng), u(rng)};
    if (orient3d(p[0], p[1], p[2], p[3]) < 0) std::swap(p[0], p[1]);
    EXPECT_EQ(in_sphere_sos(p[0], p[1], p[2], p[3], p[4], {0, 1, 2, 3, 4}), in_sphere(p[0], p[1], p[2], p[3], p[4]));
  }
}

TEST(Expansion, ExactSumsAndProducts) {
  using exact::Expansion;
  const Expansion one(1.0), tiny(0x1.0p-80);
  EXPECT_EQ((one + tiny + (-one)).sign(), 1);
  EXPECT_EQ((one + (-tiny) + (-one)).sign(), -1);
  const Expansion p = Expansion::product(1.0 + 0x1.0p-30, 1.0 - 0x1.0p-30);  // 1 - 2^-60
  EXPECT_EQ((p + (-one)).sign(), -1);
  EXPECT_DOUBLE_EQ((p + (-one)).estimate(), -0x1.0p-60);
}
