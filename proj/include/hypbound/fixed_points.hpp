#pragma once

#include <cmath>
#include <string>

#include "hypbound/curve.hpp"
#include "hypbound/map.hpp"

namespace hypbound {

enum class FixedPointLabel { P, Q };
enum class Orientation { Reversing, Preserving };  // b > 0 / b < 0

struct FixedPointData {
  Point2 location;
  double lambda_exp = 0;  // |.| > 1
  double lambda_con = 0;  // |.| < 1
  Vec2 v_exp, v_con;      // unit eigenvectors
  FixedPointLabel label = FixedPointLabel::P;
  Orientation orientation = Orientation::Reversing;
};

struct FixedPointPair {
  FixedPointData p;
  FixedPointData q;
  const FixedPointData& by_label(FixedPointLabel l) const {
    return l == FixedPointLabel::P ? p : q;
  }
};

struct OneDFixedPoints {
  double p = 0, q = 0;
  bool below_two = false;  // formula evaluated outside a >= 2
};

/// Fixed points of the one-dimensional limit 1 - a x^2.
inline OneDFixedPoints one_d_fixed_points(double a) {
  double disc = 1.0 + 4.0 * a;
  if (disc < 0) throw Error("complex roots");
  OneDFixedPoints r;
  r.p = (-1.0 + std::sqrt(disc)) / (2.0 * a);
  r.q = (-1.0 - std::sqrt(disc)) / (2.0 * a);
  r.below_two = a < 2.0;
  return r;
}

namespace detail {

inline FixedPointData solve_fixed_point(const HenonMap& map, Point2 seed,
                                        FixedPointLabel label) {
  Point2 z = seed;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    Vec2 r = map.apply(z) - z;
    if (r.norm() < 1e-14) {
      converged = true;
      break;
    }
    Mat2 J = map.jacobian(z) - Mat2::identity();
    z = z - J.inverse() * r;
    if (!std::isfinite(z.x) || !std::isfinite(z.y)) break;
  }
  if (!converged && (map.apply(z) - z).norm() > 1e-12) throw Error("Newton failed");
  FixedPointData fp;
  fp.location = z;
  Eig2 eig = eigen_real(map.jacobian(z));
  fp.lambda_exp = eig.lam1;
  fp.lambda_con = eig.lam2;
  fp.v_exp = eig.v1;
  fp.v_con = eig.v2;
  fp.label = label;
  fp.orientation = map.b() > 0 ? Orientation::Reversing : Orientation::Preserving;
  return fp;
}

}  // namespace detail

/// Both saddle fixed points, labelled by x-sign continuity from the
/// one-dimensional limit (P: x > 0, Q: x < 0), seeded on {y = b x}.
inline FixedPointPair find_fixed_points(const HenonMap& map) {
  OneDFixedPoints od = one_d_fixed_points(map.a());
  const double b = map.b();
  FixedPointPair pair{
      detail::solve_fixed_point(map, {od.p, b * od.p}, FixedPointLabel::P),
      detail::solve_fixed_point(map, {od.q, b * od.q}, FixedPointLabel::Q)};
  if (dist(pair.p.location, pair.q.location) < 1e-8) throw Error("points coincide");
  return pair;
}

enum class ManifoldKind { Stable, Unstable };

/// Straight local-manifold seed through the fixed point along the
/// corresponding eigenvector. Tag records kind and eigenvalue sign
/// (negative eigenvalues flip branches under one iterate).
inline PolyCurve local_manifold_seed(const FixedPointData& fp, ManifoldKind kind,
                                     double half_length, int points_per_side = 8) {
  if (half_length > 0.05) throw Error("half_length above local linear regime");
  if (!(std::abs(fp.lambda_exp) > 1.0 && std::abs(fp.lambda_con) < 1.0))
    throw Error("not a saddle");
  Vec2 dir = (kind == ManifoldKind::Unstable) ? fp.v_exp : fp.v_con;
  double lam = (kind == ManifoldKind::Unstable) ? fp.lambda_exp : fp.lambda_con;
  PolyCurve c;
  c.tag = std::string(kind == ManifoldKind::Unstable ? "Wu" : "Ws") +
          (fp.label == FixedPointLabel::P ? "(P)" : "(Q)") +
          (lam < 0 ? " eig<0" : " eig>0");
  const int n = 2 * points_per_side;
  for (int i = 0; i <= n; ++i) {
    double t = half_length * (2.0 * i / n - 1.0);
    c.pts.push_back(fp.location + dir * t);
    c.tangents.push_back(dir);
    c.curvatures.push_back(0.0);
    c.param.push_back(t + half_length);
  }
  return c;
}

}  // namespace hypbound
