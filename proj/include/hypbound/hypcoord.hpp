#pragma once

#include <cmath>
#include <vector>

#include "hypbound/map.hpp"
#include "hypbound/regions.hpp"

namespace hypbound {

/// Running singular value decomposition of a matrix product M_k ... M_1 in
/// log scale. The large singular value is accumulated through rescaled 2x2
/// decompositions; the small one comes from the exact determinant identity
/// log s1 + log s2 = sum log |det M_i|, which stays finite long after the
/// raw product would underflow.
class SvdAccumulator {
 public:
  void push(const Mat2& M) {
    double d = M.det();
    if (d == 0) throw Error("singular factor");
    if (count_ == 0) {
      Svd2 s = svd2(M);
      V_ = Mat2::from_columns(s.v1, s.v2);
      U_ = Mat2::from_columns(s.u1, s.u2);
      logF_ = std::log(s.s1);
      logdet_ += std::log(std::abs(d));
      ++count_;
      return;
    }
    double ratio = std::exp(std::min(logE() - logF_, 0.0));  // s2/s1, may underflow to 0
    Mat2 B = M * Mat2::from_columns(U_.col(0), U_.col(1) * ratio);
    Svd2 s = svd2(B);
    logF_ += std::log(s.s1);
    logdet_ += std::log(std::abs(d));
    V_ = compose(V_, s.v1);  // right singular frame composes with the previous one
    U_ = Mat2::from_columns(s.u1, s.u2);
    ++count_;
  }

  int count() const { return count_; }
  double logF() const { return logF_; }
  double logE() const { return logdet_ - logF_; }
  double logH() const { return logE() - logF(); }
  Vec2 most_expanded() const { return V_.col(0); }
  Vec2 most_contracted() const { return V_.col(1); }

 private:
  static Mat2 compose(const Mat2& V, Vec2 v1new) {
    Vec2 c0 = (V.col(0) * v1new.x + V.col(1) * v1new.y).normalized();
    Vec2 c1 = c0.rot90();
    return Mat2::from_columns(c0, c1);
  }

  Mat2 V_ = Mat2::identity();
  Mat2 U_ = Mat2::identity();
  double logF_ = 0;
  double logdet_ = 0;
  int count_ = 0;
};

/// Order-k most contracted / most expanded unit directions with log-scaled
/// expansion data. logH <= 0 always.
struct HyperbolicFrame {
  int order = 0;
  Vec2 e;       // most contracted
  Vec2 f;       // most expanded
  double logE = 0;
  double logF = 0;
  double logH = 0;
};

namespace detail {

inline Vec2 upper_half(Vec2 v) {
  if (v.y < 0 || (v.y == 0 && v.x < 0)) return -v;
  return v;
}

inline HyperbolicFrame frame_from_accumulator(const SvdAccumulator& acc, int k) {
  HyperbolicFrame fr;
  fr.order = k;
  fr.logE = acc.logE();
  fr.logF = acc.logF();
  fr.logH = acc.logH();
  if (std::abs(fr.logH) < 1e-12) throw Error("degenerate");
  fr.e = upper_half(acc.most_contracted());
  fr.f = upper_half(acc.most_expanded());
  return fr;
}

}  // namespace detail

/// Frame of a matrix sequence (first factor first). Exposed separately so
/// constant-coefficient products can be checked against closed forms.
inline HyperbolicFrame frame_of_product(const std::vector<Mat2>& factors) {
  SvdAccumulator acc;
  for (const auto& M : factors) acc.push(M);
  return detail::frame_from_accumulator(acc, acc.count());
}

/// Hyperbolic coordinates of order k at z: singular frame of Df^k(z).
inline HyperbolicFrame frame(const HenonMap& map, Point2 z, int k) {
  if (k < 1) throw Error("order must be positive");
  SvdAccumulator acc;
  Point2 w = z;
  for (int i = 0; i < k; ++i) {
    acc.push(map.jacobian(w));
    w = map.apply(w);
    if (std::abs(w.x) > map.params().blowup || std::abs(w.y) > map.params().blowup)
      throw Error("orbit escaped");
  }
  return detail::frame_from_accumulator(acc, k);
}

/// ln |Df^k(z) v| for a unit vector v, via stepwise renormalization.
inline double log_push_norm(const HenonMap& map, Point2 z, Vec2 v, int k) {
  double acc = 0;
  Point2 w = z;
  Vec2 u = v.normalized();
  for (int i = 0; i < k; ++i) {
    u = map.jacobian(w) * u;
    double n = u.norm();
    acc += std::log(n);
    u = u / n;
    w = map.apply(w);
  }
  return acc;
}

/// Extremal input angle of a 2x2 matrix from the closed-form condition
/// tan 2(theta) = 2 <u,w> / (|u|^2 - |w|^2) on the columns u, w. Returns the
/// most contracted direction in the upper half-circle convention.
inline Vec2 contracted_direction_formula(const Mat2& P) {
  Vec2 u{P.a00, P.a10};
  Vec2 w{P.a01, P.a11};
  double denom = u.norm2() - w.norm2();
  double numer = 2.0 * dot(u, w);
  if (numer == 0 && denom == 0) throw Error("degenerate");
  double theta = 0.5 * std::atan2(numer, denom);
  Vec2 d1{std::cos(theta), std::sin(theta)};
  Vec2 d2 = d1.rot90();
  Vec2 e = ((P * d1).norm2() <= (P * d2).norm2()) ? d1 : d2;
  return detail::upper_half(e);
}

/// Integral curve of the order-k most contracted field, integrated with a
/// fourth-order step from the seed in both directions. Stops at the target
/// arclength, on leaving the definition domain V+ u V-_k, or at a
/// degenerate frame.
inline PolyCurve integrate_stable_leaf(const HenonMap& map, const Regions& regions,
                                       Point2 seed, int k, double arclength,
                                       double step) {
  auto in_domain = [&](Point2 z) {
    if (!regions.in_v(z)) return false;
    if (!regions.d_region()) return true;  // no D attached: V+ split unavailable
    if (!regions.d_region()->contains(z)) return true;
    return regions.vn_order_at_least(z, k);
  };
  if (!in_domain(seed)) throw Error("seed outside leaf domain");

  auto field = [&](Point2 z, Vec2 orient) -> Vec2 {
    Vec2 e = frame(map, z, k).e;
    return (dot(e, orient) >= 0) ? e : -e;
  };

  auto trace = [&](double sign) {
    std::vector<Point2> pts;
    std::vector<Vec2> dirs;
    Point2 z = seed;
    Vec2 orient = frame(map, seed, k).e * sign;
    double travelled = 0;
    while (travelled < arclength) {
      Vec2 d1, d2, d3, d4;
      try {
        d1 = field(z, orient);
        d2 = field(z + d1 * (0.5 * step), d1);
        d3 = field(z + d2 * (0.5 * step), d2);
        d4 = field(z + d3 * step, d3);
      } catch (const Error&) {
        break;  // degenerate frame or escaped orbit ends the leaf
      }
      Vec2 move = (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (step / 6.0);
      Point2 nz = z + move;
      if (!in_domain(nz)) break;
      pts.push_back(nz);
      dirs.push_back(move.normalized());
      travelled += move.norm();
      orient = d4;
      z = nz;
    }
    return std::make_pair(pts, dirs);
  };

  auto [fwd, fwd_dirs] = trace(+1.0);
  auto [bwd, bwd_dirs] = trace(-1.0);

  PolyCurve leaf;
  leaf.tag = "leaf_k=" + std::to_string(k);
  for (std::size_t i = bwd.size(); i-- > 0;) {
    leaf.pts.push_back(bwd[i]);
    leaf.tangents.push_back(-bwd_dirs[i]);
  }
  leaf.pts.push_back(seed);
  leaf.tangents.push_back(frame(map, seed, k).e);
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    leaf.pts.push_back(fwd[i]);
    leaf.tangents.push_back(fwd_dirs[i]);
  }
  leaf.curvatures.assign(leaf.pts.size(), 0.0);
  leaf.param.assign(leaf.pts.size(), 0.0);
  for (std::size_t i = 1; i < leaf.pts.size(); ++i)
    leaf.param[i] = leaf.param[i - 1] + dist(leaf.pts[i - 1], leaf.pts[i]);
  for (std::size_t i = 1; i + 1 < leaf.pts.size(); ++i)
    leaf.curvatures[i] = leaf.curvature_fd_at(i);
  if (leaf.pts.size() >= 3) {
    leaf.curvatures[0] = leaf.curvatures[1];
    leaf.curvatures[leaf.pts.size() - 1] = leaf.curvatures[leaf.pts.size() - 2];
  }
  // Replace integrator step directions with the exact field for the
  /// tangent-parallel invariant, keeping the seed orientation chain.
  for (std::size_t i = 0; i < leaf.pts.size(); ++i) {
    try {
      Vec2 e = frame(map, leaf.pts[i], k).e;
      leaf.tangents[i] = (dot(e, leaf.tangents[i]) >= 0) ? e : -e;
    } catch (const Error&) {
    }
  }
  return leaf;
}

struct LeafConvergenceEntry {
  int k = 0;
  double angle = 0;     // angle(e_k, e_{k+1}) at the seed
  double c0_gap = 0;    // sup distance between the order-k and k+1 leaves
};

struct LeafConvergenceReport {
  std::vector<LeafConvergenceEntry> entries;
  double fitted_ratio = std::numeric_limits<double>::quiet_NaN();
};

inline LeafConvergenceReport leaf_convergence(const HenonMap& map, const Regions& regions,
                                              Point2 seed, int k_max,
                                              double arclength = 0.05,
                                              double step = 2e-3) {
  LeafConvergenceReport rep;
  std::vector<PolyCurve> leaves;
  for (int k = 1; k <= k_max + 1; ++k)
    leaves.push_back(integrate_stable_leaf(map, regions, seed, k, arclength, step));
  for (int k = 1; k <= k_max; ++k) {
    LeafConvergenceEntry e;
    e.k = k;
    e.angle = line_angle(frame(map, seed, k).e, frame(map, seed, k + 1).e);
    e.c0_gap = max_dist_to_curve(leaves[k - 1].pts, leaves[k]);
    rep.entries.push_back(e);
  }
  if (rep.entries.size() >= 2) {
    double logsum = 0;
    int n = 0;
    for (std::size_t i = 1; i < rep.entries.size(); ++i) {
      if (rep.entries[i - 1].angle > 0 && rep.entries[i].angle > 0) {
        logsum += std::log(rep.entries[i].angle / rep.entries[i - 1].angle);
        ++n;
      }
    }
    if (n > 0) rep.fitted_ratio = std::exp(logsum / n);
  }
  return rep;
}

}  // namespace hypbound
