#pragma once

#include <array>
#include <cmath>

#include "hypbound/common.hpp"

namespace hypbound {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2 operator-() const { return {-x, -y}; }

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
  /// 90-degree counterclockwise rotation.
  Vec2 rot90() const { return {-y, x}; }
};

using Point2 = Vec2;

inline Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dist(Point2 a, Point2 b) { return (a - b).norm(); }

/// Unsigned angle between two lines spanned by a and b, in [0, pi/2].
inline double line_angle(Vec2 a, Vec2 b) {
  double c = std::abs(dot(a, b));
  double s = std::abs(cross(a, b));
  return std::atan2(s, c);
}

/// Unsigned angle between two directions (vectors), in [0, pi].
inline double vec_angle(Vec2 a, Vec2 b) {
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

/// 2x2 real matrix, row major.
struct Mat2 {
  double a00 = 0, a01 = 0, a10 = 0, a11 = 0;

  Vec2 operator*(Vec2 v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
  Mat2 operator*(const Mat2& o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
  Mat2 operator+(const Mat2& o) const {
    return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11};
  }

  double det() const { return a00 * a11 - a01 * a10; }
  Mat2 transpose() const { return {a00, a10, a01, a11}; }
  Mat2 inverse() const {
    double d = det();
    return {a11 / d, -a01 / d, -a10 / d, a00 / d};
  }
  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 from_columns(Vec2 c0, Vec2 c1) { return {c0.x, c1.x, c0.y, c1.y}; }
  Vec2 col(int i) const { return i == 0 ? Vec2{a00, a10} : Vec2{a01, a11}; }

  double max_abs() const {
    return std::max(std::max(std::abs(a00), std::abs(a01)),
                    std::max(std::abs(a10), std::abs(a11)));
  }
};

using Jacobian2 = Mat2;

/// Singular value decomposition A = U diag(s1, s2) V^T with s1 >= s2 >= 0.
/// The small singular value is recovered from |det| / s1, which stays
/// accurate when the matrix is nearly rank one.
struct Svd2 {
  Vec2 u1, u2;   // left singular vectors
  Vec2 v1, v2;   // right singular vectors
  double s1 = 0, s2 = 0;
};

inline Svd2 svd2(const Mat2& A) {
  Svd2 r;
  // Eigen-decomposition of A^T A: dominant eigenvector is v1.
  const double e = A.a00 * A.a00 + A.a10 * A.a10;   // |col0|^2
  const double g = A.a01 * A.a01 + A.a11 * A.a11;   // |col1|^2
  const double f = A.a00 * A.a01 + A.a10 * A.a11;   // col0 . col1
  const double tr = e + g;
  const double diff = e - g;
  const double rt = std::hypot(diff, 2.0 * f);
  const double lam1 = 0.5 * (tr + rt);  // largest eigenvalue of A^T A
  r.s1 = std::sqrt(std::max(lam1, 0.0));
  // Dominant right singular vector: eigenvector of A^T A for lam1.
  Vec2 v1;
  if (diff >= 0) {
    v1 = Vec2{diff + rt, 2.0 * f};
  } else {
    v1 = Vec2{2.0 * f, rt - diff};
  }
  if (v1.norm2() == 0) v1 = Vec2{1, 0};  // isotropic case, any direction
  r.v1 = v1.normalized();
  r.v2 = r.v1.rot90();
  const double ad = A.det();
  r.s2 = r.s1 > 0 ? std::abs(ad) / r.s1 : 0.0;
  r.u1 = r.s1 > 0 ? (A * r.v1) / r.s1 : Vec2{1, 0};
  r.u1 = r.u1.normalized();
  // Left vectors stay orthogonal; orientation fixed by sign of det.
  r.u2 = (ad >= 0) ? r.u1.rot90() : -r.u1.rot90();
  return r;
}

/// Spectral norm.
inline double op_norm(const Mat2& A) { return svd2(A).s1; }

/// Smallest singular value, i.e. 1 / |A^{-1}|.
inline double min_singular(const Mat2& A) { return svd2(A).s2; }

/// Real eigen-decomposition of a 2x2 matrix. Throws if eigenvalues are complex.
struct Eig2 {
  double lam1 = 0, lam2 = 0;  // |lam1| >= |lam2|
  Vec2 v1, v2;                // unit eigenvectors
};

inline Eig2 eigen_real(const Mat2& A) {
  const double tr = A.a00 + A.a11;
  const double de = A.det();
  const double disc = tr * tr - 4.0 * de;
  if (disc < 0) throw Error("complex eigenvalues");
  const double sq = std::sqrt(disc);
  // Stable quadratic roots.
  double l1 = (tr >= 0) ? 0.5 * (tr + sq) : 0.5 * (tr - sq);
  double l2 = (l1 != 0.0) ? de / l1 : 0.5 * (tr - sq);
  if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);
  Eig2 r;
  r.lam1 = l1;
  r.lam2 = l2;
  auto eigvec = [&](double lam) {
    // (A - lam I) v = 0: pick the better-conditioned row.
    Vec2 r0{A.a00 - lam, A.a01};
    Vec2 r1{A.a10, A.a11 - lam};
    Vec2 v = (r0.norm2() >= r1.norm2()) ? Vec2{-r0.y, r0.x} : Vec2{-r1.y, r1.x};
    if (v.norm2() == 0) v = Vec2{1, 0};
    return v.normalized();
  };
  r.v1 = eigvec(l1);
  r.v2 = eigvec(l2);
  return r;
}

}  // namespace hypbound
