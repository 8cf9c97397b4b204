#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hypbound/bifurcation.hpp"
#include "hypbound/manifolds.hpp"

namespace hypbound {

enum class RegionKind {
  V1, V2, V3, V4, V5, V6, R, Rhat, DeltaEps, Delta, Qball, V, Qn, Vn, VnPlus, VnMinus, D
};

struct RegionSpec {
  RegionKind kind;
  double eps = 0.15;  // DeltaEps / Delta half-width
  int n = 0;          // order for Qn / Vn / Vn+-
};

/// Closed topological disc bounded by an unstable arc and a stable arc.
struct DRegion {
  std::vector<Point2> boundary;  // counterclockwise closed polygon
  std::size_t unstable_arc_end = 0;  // boundary[0..end) came from the unstable piece

  bool contains(Point2 z) const {
    // Ray-crossing parity test.
    bool in = false;
    std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2& a = boundary[j];
      const Point2& b = boundary[i];
      if ((b.y > z.y) != (a.y > z.y)) {
        double xint = b.x + (z.y - b.y) * (a.x - b.x) / (a.y - b.y);
        if (z.x < xint) in = !in;
      }
    }
    return in;
  }

  double area() const {
    double s = 0;
    std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) s += cross(boundary[j], boundary[i]);
    return 0.5 * std::abs(s);
  }

  Rect bbox() const {
    Rect r{1e300, -1e300, 1e300, -1e300};
    for (const auto& p : boundary) {
      r.xmin = std::min(r.xmin, p.x);
      r.xmax = std::max(r.xmax, p.x);
      r.ymin = std::min(r.ymin, p.y);
      r.ymax = std::max(r.ymax, p.y);
    }
    return r;
  }

  double boundary_distance(Point2 z) const {
    double best = 1e300;
    std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
      best = std::min(best, project_to_segment(z, boundary[j], boundary[i]).distance);
    return best;
  }
};

/// D is the region enclosed by the primary-fold hairpin of the unstable
/// manifold of P and the short stable arc of Q between the two enclosing
/// heteroclinic crossings.
inline DRegion build_d_region(const HenonMap& map, const FixedPointPair& fps,
                              Rect window = {-2.0, 2.0, -4.0, 2.0},
                              GrowthConfig cfg = {}) {
  PolyCurve wu = grow_unstable(map, fps.p, 10.0, window, cfg);
  Rect column{fps.q.location.x - 0.35, fps.q.location.x + 0.35, window.ymin, window.ymax};
  PolyCurve ws = grow_generations(map, fps.q, ManifoldKind::Stable, 2, column, cfg);
  // Keep the stable component passing through q.
  double best = 1e300;
  std::size_t best_comp = 0;
  for (std::size_t c = 0; c < ws.component_count(); ++c) {
    auto [lo, hi] = ws.component_range(c);
    for (std::size_t i = lo; i < hi; ++i) {
      double d = dist(ws.pts[i], fps.q.location);
      if (d < best) {
        best = d;
        best_comp = c;
      }
    }
  }
  auto [slo, shi] = ws.component_range(best_comp);
  PolyCurve steep;
  steep.pts.assign(ws.pts.begin() + slo, ws.pts.begin() + shi);
  steep.tangents.assign(ws.tangents.begin() + slo, ws.tangents.begin() + shi);
  steep.curvatures.assign(ws.curvatures.begin() + slo, ws.curvatures.begin() + shi);
  steep.param.assign(ws.param.begin() + slo, ws.param.begin() + shi);

  CrossingReport rep = crossings(wu, steep);
  if (rep.count < 2) throw Error("no crossings: D undefined below the four-crossing range");

  // The crossings come back ordered along the unstable curve; take the
  // consecutive pair enclosing its rightmost vertex (the primary fold).
  double keymax = 0;
  double xmax = -1e300;
  for (std::size_t i = 0; i < wu.size(); ++i)
    if (wu.pts[i].x > xmax) {
      xmax = wu.pts[i].x;
      keymax = static_cast<double>(i);
    }
  const Crossing* left = nullptr;
  const Crossing* right = nullptr;
  for (const auto& c : rep.points) {
    double key = c.seg_a + c.frac_a;
    if (key <= keymax && (!left || key > left->seg_a + left->frac_a)) left = &c;
    if (key >= keymax && (!right || key < right->seg_a + right->frac_a)) right = &c;
  }
  if (!left || !right) throw Error("no crossings: fold not enclosed");

  DRegion d;
  d.boundary.push_back(left->point);
  for (std::size_t i = left->seg_a + 1; i <= right->seg_a; ++i) {
    if (!wu.segment_valid(i - 1) && i - 1 != left->seg_a) throw Error("unstable arc broken");
    d.boundary.push_back(wu.pts[i]);
  }
  d.boundary.push_back(right->point);
  d.unstable_arc_end = d.boundary.size();
  // Stable arc from the right crossing back to the left one.
  double kb0 = left->seg_b + left->frac_b;
  double kb1 = right->seg_b + right->frac_b;
  bool forward = kb1 < kb0;  // walk the stable polyline towards the left crossing
  if (forward) {
    for (std::size_t i = right->seg_b; i > left->seg_b; --i) d.boundary.push_back(steep.pts[i]);
  } else {
    for (std::size_t i = right->seg_b + 1; i <= left->seg_b; ++i) d.boundary.push_back(steep.pts[i]);
  }
  // Enforce counterclockwise orientation.
  double s = 0;
  std::size_t n = d.boundary.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) s += cross(d.boundary[j], d.boundary[i]);
  if (s < 0) {
    std::reverse(d.boundary.begin(), d.boundary.end());
    d.unstable_arc_end = d.boundary.size() - d.unstable_arc_end;
  }
  return d;
}

struct VkOrder {
  int order = 0;
  bool capped = false;   // reached k_cap: treated as the infinite-order set
  bool in_domain = true; // false when f(z) lies outside V
};

/// Membership tests for the phase-space decomposition, the fixed-point
/// neighbourhoods Q_n / V_n and the critical neighbourhood. The vertical
/// strip bounds use |b| so both orientation cases share one decomposition.
class Regions {
 public:
  Regions(const HenonMap& map, const FixedPointPair& fps, double delta = 0.1)
      : map_(map), fps_(fps), delta_(delta), babs_(std::abs(map.b())) {}

  void attach_d_region(DRegion d) { d_ = std::move(d); }
  const std::optional<DRegion>& d_region() const { return d_; }
  double delta() const { return delta_; }
  Point2 q_center() const { return fps_.q.location; }

  bool contains(Point2 z, RegionSpec spec) const {
    const double x = z.x, y = z.y;
    switch (spec.kind) {
      case RegionKind::V1: return x <= -2 && y <= std::abs(x);
      case RegionKind::V2: return x <= 2 && y <= -4;
      case RegionKind::V3: return x >= 2 && y <= 2;
      case RegionKind::V4: return x >= -2 && y >= 2;
      case RegionKind::V5: return x <= -2 && y >= std::abs(x);
      case RegionKind::V6: return std::abs(x) <= 2 && y >= 4 * babs_;
      case RegionKind::R: return x > -2 && x < 2 && y > -4 && y < 4 * babs_;
      case RegionKind::Rhat: return x > -2 && x < 2 && y > -4 && y < 2;
      case RegionKind::DeltaEps:
        return std::abs(x) < spec.eps && std::abs(y) < 4 * babs_;
      case RegionKind::Delta: {
        if (!(std::abs(x) < spec.eps && std::abs(y) < 4 * babs_)) return false;
        if (!d_) throw Error("D region not attached");
        return !d_->contains(map_.apply(z));
      }
      case RegionKind::Qball: return dist(z, fps_.q.location) < delta_;
      case RegionKind::V: return in_v(z);
      case RegionKind::Qn: {
        Point2 w = z;
        for (int i = 0; i <= spec.n; ++i) {
          if (dist(w, fps_.q.location) >= delta_) return false;
          w = map_.apply(w);
        }
        return true;
      }
      case RegionKind::Vn: return vn_order_at_least(z, spec.n);
      case RegionKind::VnPlus: {
        if (!vn_order_at_least(z, spec.n)) return false;
        if (!d_) throw Error("D region not attached");
        return !d_->contains(z);
      }
      case RegionKind::VnMinus: {
        if (!vn_order_at_least(z, spec.n)) return false;
        if (!d_) throw Error("D region not attached");
        return d_->contains(z);
      }
      case RegionKind::D:
        if (!d_) throw Error("D region not attached");
        return d_->contains(z);
    }
    return false;
  }

  bool in_v(Point2 z) const {
    if (z.x <= 0) return false;  // selects the component away from q
    return dist(map_.apply(z), fps_.q.location) < delta_;
  }

  /// z in V_n  <=>  z in V and f^j(z) in Q for j = 1..n+1.
  bool vn_order_at_least(Point2 z, int n) const {
    if (!in_v(z)) return false;
    Point2 w = map_.apply(z);
    for (int j = 0; j <= n; ++j) {
      if (dist(w, fps_.q.location) >= delta_) return false;
      w = map_.apply(w);
    }
    return true;
  }

  /// Largest k <= k_cap with f(z) in V_k (the recovery order of a point of
  /// the critical neighbourhood).
  VkOrder vk_order(Point2 z, int k_cap) const { return v_order(map_.apply(z), k_cap); }

  /// Largest k <= k_cap with w in V_k, for points already inside V.
  VkOrder v_order(Point2 w, int k_cap) const {
    VkOrder r;
    if (!in_v(w)) {
      r.in_domain = false;
      r.order = 0;
      return r;
    }
    Point2 u = map_.apply(w);
    int consecutive = 0;  // count of j >= 1 with f^j(w) in Q
    while (consecutive <= k_cap + 1) {
      if (dist(u, fps_.q.location) >= delta_) break;
      ++consecutive;
      u = map_.apply(u);
    }
    if (consecutive >= k_cap + 2) {
      r.order = k_cap;  // still inside Q at the cap: infinite-order marker
      r.capped = true;
    } else {
      r.order = std::min(consecutive - 1, k_cap);  // V_k needs j = 1..k+1 in Q
      if (r.order < 0) {
        r.order = 0;
        r.in_domain = false;
      }
    }
    return r;
  }

  /// Piece of the stable manifold of q crossing V (the first preimage of
  /// the local stable arc), resolved to the requested spacing. Points on it
  /// have unbounded vk order.
  PolyCurve stable_preimage_arc(double spacing = 2e-4) const {
    GrowthConfig cfg;
    cfg.max_spacing = spacing;
    Rect vbox{0.3, 1.6, -0.5, 0.5};
    PolyCurve ws = grow_generations(map_, fps_.q, ManifoldKind::Stable, 2, vbox, cfg);
    return filter_curve(ws, [&](Point2 p) { return in_v(p); });
  }

 private:
  const HenonMap& map_;
  FixedPointPair fps_;
  double delta_;
  double babs_;
  std::optional<DRegion> d_;
};

struct EscapeFailure {
  Point2 start;
  std::string reason;
};

struct EscapeReport {
  RegionKind region = RegionKind::V1;
  int grid = 0;
  bool forward = true;
  int tested = 0;
  int max_steps = 0;
  std::vector<EscapeFailure> failures;
  bool passed() const { return failures.empty(); }
};

/// Every grid point of the region inside [-10,10]^2 must leave [-10,10]^2
/// under iteration in the prescribed time direction; points of V1 must at
/// least double |x| on every step spent inside V1.
inline EscapeReport verify_escape(const HenonMap& map, const Regions& regions,
                                  RegionKind kind, int grid, int step_cap = 100) {
  EscapeReport rep;
  rep.region = kind;
  rep.grid = grid;
  rep.forward = (kind == RegionKind::V1 || kind == RegionKind::V2 || kind == RegionKind::V3);
  const Rect box{-10, 10, -10, 10};
  std::vector<Point2> pts;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      Point2 z{-10.0 + 20.0 * i / grid, -10.0 + 20.0 * j / grid};
      if (regions.contains(z, {kind})) pts.push_back(z);
    }
  rep.tested = static_cast<int>(pts.size());
  std::vector<int> steps(pts.size(), -1);
  std::vector<std::string> why(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    Point2 w = pts[i];
    for (int s = 1; s <= step_cap; ++s) {
      Point2 prev = w;
      w = rep.forward ? map.apply(w) : map.apply_inverse(w);
      if (kind == RegionKind::V1 && regions.contains(prev, {RegionKind::V1}) &&
          regions.contains(w, {RegionKind::V1}) && box.contains(w.x, w.y)) {
        if (std::abs(w.x) < 2.0 * std::abs(prev.x)) {
          why[i] = "doubling failed";
          return;
        }
      }
      if (!box.contains(w.x, w.y)) {
        steps[i] = s;
        return;
      }
    }
    why[i] = "did not exit";
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (steps[i] < 0 || !why[i].empty()) {
      rep.failures.push_back({pts[i], why[i].empty() ? "did not exit" : why[i]});
    } else {
      rep.max_steps = std::max(rep.max_steps, steps[i]);
    }
  }
  return rep;
}

struct LocalizationReport {
  int samples = 0;
  int bounded = 0;
  int violations_strip = 0;    // bounded orbit ended outside [-2,2]x(-4|b|,4|b|)
  int violations_distance = 0; // bounded orbit ended far from the unstable manifold
  std::vector<EscapeFailure> witnesses;
  double area_ratio = 0;       // measured area(f^n(D)) / area(D)
  double area_bound = 0;       // (|b| + 12 eta)^n
  int area_steps = 0;
  bool passed() const { return violations_strip == 0 && violations_distance == 0; }
};

/// Orbit-based localization check: bounded orbits started in D end up in the
/// invariant strip near the unstable manifold of P, and the area of f^n(D)
/// contracts at the determinant rate.
inline LocalizationReport verify_localization(const HenonMap& map, const Regions& regions,
                                              const PolyCurve& wu_p, int samples,
                                              int n_iter, double tol_loc = 1e-2,
                                              int area_steps = 5,
                                              std::uint64_t seed = 2024) {
  if (!regions.d_region()) throw Error("D region not attached");
  const DRegion& d = *regions.d_region();
  LocalizationReport rep;
  rep.samples = samples;
  rep.area_steps = area_steps;
  Rect bb = d.bbox();
  Rng rng(seed);
  SegmentGrid grid(wu_p);
  const double babs = std::abs(map.b());
  for (int i = 0; i < samples; ++i) {
    Point2 z{rng.uniform(bb.xmin, bb.xmax), rng.uniform(bb.ymin, bb.ymax)};
    if (!d.contains(z)) {
      --i;
      continue;
    }
    Point2 w = z;
    bool bounded = true;
    for (int s = 0; s < n_iter; ++s) {
      w = map.apply(w);
      if (std::abs(w.x) > 10 || std::abs(w.y) > 10) {
        bounded = false;
        break;
      }
    }
    if (bounded) {
      // Escaping transients can still sit inside the box at step n; look
      // ahead to separate them from genuinely bounded orbits.
      Point2 ahead = w;
      for (int s = 0; s < 60 && bounded; ++s) {
        ahead = map.apply(ahead);
        if (std::abs(ahead.x) > 10 || std::abs(ahead.y) > 10) bounded = false;
      }
    }
    if (!bounded) continue;
    ++rep.bounded;
    bool strip_ok = std::abs(w.x) <= 2.0 && std::abs(w.y) <= 4 * babs + 1e-9;
    double dist_wu = grid.nearest(w, 10 * tol_loc).distance;
    if (!strip_ok) {
      ++rep.violations_strip;
      if (rep.witnesses.size() < 16) rep.witnesses.push_back({z, "ended outside strip"});
    }
    if (dist_wu > tol_loc) {
      ++rep.violations_distance;
      if (rep.witnesses.size() < 16) rep.witnesses.push_back({z, "far from unstable manifold"});
    }
  }
  // Monte-Carlo area of f^n(D): area(D) * mean |det Df^n| over D.
  const int area_samples = 100000;
  double mean = 0;
  int used = 0;
  while (used < area_samples) {
    Point2 z{rng.uniform(bb.xmin, bb.xmax), rng.uniform(bb.ymin, bb.ymax)};
    if (!d.contains(z)) continue;
    double logdet = 0;
    Point2 w = z;
    for (int s = 0; s < area_steps; ++s) {
      logdet += std::log(std::abs(map.jacobian(w).det()));
      w = map.apply(w);
    }
    mean += std::exp(logdet);
    ++used;
  }
  mean /= area_samples;
  rep.area_ratio = mean;
  double eta = map.params().eta_bound;
  rep.area_bound = std::pow(babs + 12 * eta, area_steps);
  return rep;
}

/// Largest k such that every sampled point of the critical neighbourhood
/// maps into V_k; -1 when some image misses V entirely.
inline int containment_order(const HenonMap& map, const Regions& regions, double eps,
                             int k_cap, int grid = 20) {
  const double babs = std::abs(map.b());
  int min_order = k_cap;
  bool all_in_v = true;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j) {
      Point2 z{-eps + 2 * eps * i / grid, -4 * babs + 8 * babs * j / grid};
      VkOrder o = regions.vk_order(z, k_cap);
      if (!o.in_domain) {
        all_in_v = false;
        continue;
      }
      min_order = std::min(min_order, o.order);
    }
  return all_in_v ? min_order : -1;
}

}  // namespace hypbound
