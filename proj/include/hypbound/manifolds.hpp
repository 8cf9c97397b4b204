#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "hypbound/curve.hpp"
#include "hypbound/fixed_points.hpp"
#include "hypbound/map.hpp"

namespace hypbound {

struct GrowthConfig {
  double max_spacing = 1e-3;
  double max_turn = 0.05;           // radians of tangent change per segment
  std::size_t vertex_cap = 1000000;
  double pad = 4.0;                 // working margin around the clip window
  double seed_half_length = 0.02;
  int generation_cap = 200;
};

namespace detail {

struct Node {
  double t = 0;       // seed parameter
  Point2 z;           // current-generation image of seed(t)
  Vec2 u{1, 0};       // unit tangent, pushed analytically
  double kappa = 0;   // signed curvature, pushed analytically
  bool escaped = false;
};

/// Shared state for one manifold growth run.
class Grower {
 public:
  Grower(const HenonMap& map, const FixedPointData& fp, ManifoldKind kind,
         Rect window, GrowthConfig cfg)
      : map_(map), fp_(fp), kind_(kind), window_(window), cfg_(cfg) {
    dir_ = (kind == ManifoldKind::Unstable) ? fp.v_exp : fp.v_con;
  }

  Point2 seed_point(double t) const { return fp_.location + dir_ * t; }

  Node eval(double t, int gens) const {
    Node n;
    n.t = t;
    n.z = seed_point(t);
    n.u = dir_;
    n.kappa = 0;
    for (int g = 0; g < gens; ++g) {
      if (!step(n)) break;
    }
    return n;
  }

  /// One application of the map (or its inverse) to a node, pushing tangent
  /// and curvature along. Returns false once the node escapes.
  bool step(Node& n) const {
    if (n.escaped) return false;
    if (kind_ == ManifoldKind::Unstable) {
      Point2 z1 = map_.apply(n.z);
      if (!finite(z1)) {
        n.escaped = true;
        return false;
      }
      auto [u1, k1] = map_.push_tangent_curvature(n.z, n.u, n.kappa);
      n.z = z1;
      n.u = u1;
      n.kappa = k1;
    } else {
      Point2 w = map_.apply_inverse(n.z);
      if (!finite(w)) {
        n.escaped = true;
        return false;
      }
      auto [u0, k0] = map_.pull_tangent_curvature(w, n.u, n.kappa);
      n.z = w;
      n.u = u0;
      n.kappa = k0;
    }
    if (std::abs(n.z.x) > escape_bound_ || std::abs(n.z.y) > escape_bound_) {
      n.escaped = true;
      return false;
    }
    return true;
  }

  std::vector<std::vector<Node>> initial_components(int points) const {
    std::vector<Node> seed;
    for (int i = 0; i <= points; ++i) {
      double t = cfg_.seed_half_length * (2.0 * i / points - 1.0);
      Node n;
      n.t = t;
      n.z = seed_point(t);
      n.u = dir_;
      n.kappa = 0;
      seed.push_back(n);
    }
    return {seed};
  }

  void advance(std::vector<std::vector<Node>>& comps, int gen_done) {
    for (auto& comp : comps)
      for (auto& n : comp) step(n);
    prune(comps);
    refine(comps, gen_done + 1);
  }

  /// Drop nodes far outside the padded window, keeping one out-of-window
  /// sentinel on each side of a boundary crossing; split into components.
  void prune(std::vector<std::vector<Node>>& comps) const {
    Rect padded = window_.padded(cfg_.pad);
    std::vector<std::vector<Node>> out;
    for (auto& comp : comps) {
      std::vector<char> keep(comp.size(), 0);
      for (std::size_t i = 0; i < comp.size(); ++i) {
        if (!comp[i].escaped && padded.contains(comp[i].z.x, comp[i].z.y)) {
          keep[i] = 1;
          if (i > 0) keep[i - 1] |= 2;
          if (i + 1 < comp.size()) keep[i + 1] |= 2;
        }
      }
      std::vector<Node> cur;
      for (std::size_t i = 0; i < comp.size(); ++i) {
        if (keep[i]) {
          cur.push_back(comp[i]);
        } else if (!cur.empty()) {
          if (cur.size() >= 2) out.push_back(std::move(cur));
          cur.clear();
        }
      }
      if (cur.size() >= 2) out.push_back(std::move(cur));
    }
    comps = std::move(out);
  }

  /// Subdivide (in the seed parameter) every segment near the window whose
  /// image spacing or tangent turn exceeds the tolerances.
  void refine(std::vector<std::vector<Node>>& comps, int gens) {
    Rect padded = window_.padded(cfg_.pad);
    for (auto& comp : comps) {
      std::size_t i = 0;
      while (i + 1 < comp.size()) {
        if (total_vertices(comps) >= cfg_.vertex_cap) {
          budget_exceeded_ = true;
          return;
        }
        const Node& a = comp[i];
        const Node& b = comp[i + 1];
        double dt = b.t - a.t;
        bool near_window = padded.contains(a.z.x, a.z.y) || padded.contains(b.z.x, b.z.y);
        bool too_far = dist(a.z, b.z) > cfg_.max_spacing;
        bool too_bent =
            !a.escaped && !b.escaped && vec_angle(a.u, b.u) > cfg_.max_turn;
        if (near_window && (too_far || too_bent) &&
            dt > 1e-14 * std::max(1.0, std::abs(a.t))) {
          comp.insert(comp.begin() + static_cast<long>(i) + 1,
                      eval(a.t + 0.5 * dt, gens));
        } else {
          ++i;
        }
      }
    }
  }

  static bool finite(Point2 z) { return std::isfinite(z.x) && std::isfinite(z.y); }

  static std::size_t total_vertices(const std::vector<std::vector<Node>>& comps) {
    std::size_t n = 0;
    for (const auto& c : comps) n += c.size();
    return n;
  }

  /// Arclength of the segments lying inside the clip window, optionally
  /// restricted to seed parameters |t| <= tmax.
  double window_arclength(const std::vector<std::vector<Node>>& comps,
                          double tmax = std::numeric_limits<double>::infinity()) const {
    double L = 0;
    for (const auto& comp : comps)
      for (std::size_t i = 0; i + 1 < comp.size(); ++i) {
        const Node& a = comp[i];
        const Node& b = comp[i + 1];
        if (std::abs(a.t) > tmax || std::abs(b.t) > tmax) continue;
        if (window_.contains(a.z.x, a.z.y) && window_.contains(b.z.x, b.z.y))
          L += dist(a.z, b.z);
      }
    return L;
  }

  /// Final conversion: clip segments to the window exactly and emit a
  /// multi-arc PolyCurve with the pushed tangent/curvature data.
  PolyCurve extract(const std::vector<std::vector<Node>>& comps, double tmax,
                    const std::string& tag) const {
    PolyCurve c;
    c.tag = tag;
    c.component_starts.clear();
    auto emit = [&](const Node& n, std::optional<Point2> at = std::nullopt) {
      c.pts.push_back(at.value_or(n.z));
      c.tangents.push_back(n.u);
      c.curvatures.push_back(n.kappa);
    };
    for (const auto& comp : comps) {
      bool open = false;
      for (std::size_t i = 0; i + 1 < comp.size(); ++i) {
        const Node& a = comp[i];
        const Node& b = comp[i + 1];
        if (std::abs(a.t) > tmax || std::abs(b.t) > tmax) continue;
        bool ain = window_.contains(a.z.x, a.z.y);
        bool bin = window_.contains(b.z.x, b.z.y);
        if (!ain && !bin) {
          open = false;
          continue;
        }
        if (ain) {
          if (!open) {
            c.component_starts.push_back(c.pts.size());
            emit(a);
            open = true;
          }
          if (bin) {
            if (dist(b.z, c.pts.back()) > 1e-15) emit(b);
          } else {
            emit(b, clip_point(a.z, b.z));
            open = false;
          }
        } else {  // a out, b in: start a fresh arc at the boundary
          c.component_starts.push_back(c.pts.size());
          emit(a, clip_point(b.z, a.z));
          emit(b);
          open = true;
        }
      }
    }
    if (c.component_starts.empty()) c.component_starts.push_back(0);
    // Drop degenerate single-vertex arcs.
    PolyCurve clean;
    clean.tag = c.tag;
    clean.component_starts.clear();
    for (std::size_t k = 0; k < c.component_starts.size(); ++k) {
      std::size_t lo = c.component_starts[k];
      std::size_t hi = (k + 1 < c.component_starts.size()) ? c.component_starts[k + 1]
                                                           : c.pts.size();
      if (hi - lo < 2) continue;
      clean.component_starts.push_back(clean.pts.size());
      for (std::size_t i = lo; i < hi; ++i) {
        clean.pts.push_back(c.pts[i]);
        clean.tangents.push_back(c.tangents[i]);
        clean.curvatures.push_back(c.curvatures[i]);
      }
    }
    if (clean.component_starts.empty()) clean.component_starts.push_back(0);
    clean.param.assign(clean.pts.size(), 0.0);
    for (std::size_t k = 0; k < clean.component_count(); ++k) {
      auto [lo, hi] = clean.component_range(k);
      for (std::size_t i = lo + 1; i < hi; ++i)
        clean.param[i] = clean.param[i - 1] + dist(clean.pts[i - 1], clean.pts[i]);
    }
    return clean;
  }

  /// Intersection of the segment from inside point p to outside point q with
  /// the window boundary.
  Point2 clip_point(Point2 inside, Point2 outside) const {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      Point2 m = inside + (outside - inside) * mid;
      if (window_.contains(m.x, m.y)) lo = mid;
      else hi = mid;
    }
    return inside + (outside - inside) * lo;
  }

  bool budget_exceeded() const { return budget_exceeded_; }

 private:
  const HenonMap& map_;
  FixedPointData fp_;
  ManifoldKind kind_;
  Rect window_;
  GrowthConfig cfg_;
  Vec2 dir_;
  double escape_bound_ = 1e8;
  bool budget_exceeded_ = false;
};

inline PolyCurve grow(const HenonMap& map, const FixedPointData& fp, ManifoldKind kind,
                      double max_arclength, int max_generations, Rect window,
                      GrowthConfig cfg, const std::string& tag) {
  if (!(std::abs(fp.lambda_exp) > 1.0 && std::abs(fp.lambda_con) < 1.0))
    throw Error("not a saddle");
  Grower grower(map, fp, kind, window, cfg);
  auto comps = grower.initial_components(16);
  grower.refine(comps, 0);
  const bool by_length = max_arclength > 0;
  double prev_len = grower.window_arclength(comps);
  if (by_length && prev_len >= max_arclength) {
    // Zero-growth request: the seed already covers the target.
    return grower.extract(comps, cfg.seed_half_length, tag);
  }
  int stagnant = 0;
  int gens = 0;
  int cap = std::min(max_generations > 0 ? max_generations : cfg.generation_cap,
                     cfg.generation_cap);
  while (gens < cap) {
    grower.advance(comps, gens);
    ++gens;
    if (grower.budget_exceeded()) throw Error("refinement budget exceeded");
    double len = grower.window_arclength(comps);
    if (by_length && len >= max_arclength) break;
    stagnant = (len <= prev_len * 1.0001 + 1e-12) ? stagnant + 1 : 0;
    prev_len = len;
    if (by_length && stagnant >= 4) break;  // curve no longer grows in window
  }
  double tmax = std::numeric_limits<double>::infinity();
  if (by_length && grower.window_arclength(comps) > max_arclength) {
    // Trim symmetrically in the seed parameter to land on the target length.
    double lo = 0, hi = cfg.seed_half_length;
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (lo + hi);
      if (grower.window_arclength(comps, mid) < max_arclength) lo = mid;
      else hi = mid;
    }
    tmax = hi;
  }
  return grower.extract(comps, tmax, tag);
}

}  // namespace detail

/// Forward growth of the unstable manifold as an adaptively refined
/// polyline, clipped to the window, stopping at the arclength target.
inline PolyCurve grow_unstable(const HenonMap& map, const FixedPointData& fp,
                               double max_arclength, Rect window,
                               GrowthConfig cfg = {}) {
  std::string tag = std::string("Wu(") + (fp.label == FixedPointLabel::P ? "P" : "Q") + ")";
  return detail::grow(map, fp, ManifoldKind::Unstable, max_arclength, -1, window, cfg, tag);
}

/// Backward growth of the stable manifold; requires invertibility.
inline PolyCurve grow_stable(const HenonMap& map, const FixedPointData& fp,
                             double max_arclength, Rect window, GrowthConfig cfg = {}) {
  if (!map.has_inverse()) throw Error("inverse undefined for b=0");
  std::string tag = std::string("Ws(") + (fp.label == FixedPointLabel::P ? "P" : "Q") + ")";
  return detail::grow(map, fp, ManifoldKind::Stable, max_arclength, -1, window, cfg, tag);
}

/// Growth by a fixed number of generations; the compact-piece conventions
/// are phrased this way.
inline PolyCurve grow_generations(const HenonMap& map, const FixedPointData& fp,
                                  ManifoldKind kind, int generations, Rect window,
                                  GrowthConfig cfg = {}) {
  if (kind == ManifoldKind::Stable && !map.has_inverse())
    throw Error("inverse undefined for b=0");
  std::string tag = std::string(kind == ManifoldKind::Unstable ? "Wu(" : "Ws(") +
                    (fp.label == FixedPointLabel::P ? "P" : "Q") + ")";
  return detail::grow(map, fp, kind, -1.0, generations, window, cfg, tag);
}

struct Crossing {
  Point2 point;
  double angle = 0;       // between tangent lines, in [0, pi/2]
  std::size_t seg_a = 0, seg_b = 0;
  double frac_a = 0, frac_b = 0;
};

struct CrossingReport {
  std::vector<Crossing> points;
  int count = 0;
  /// Positive: minimal distance between disjoint curves. Negative: maximal
  /// penetration depth across crossing pairs.
  double min_clearance = 0;
};

namespace detail {

inline std::optional<std::pair<double, double>> segment_intersection(Point2 p1, Point2 p2,
                                                                     Point2 q1, Point2 q2) {
  Vec2 r = p2 - p1, s = q2 - q1;
  double denom = cross(r, s);
  if (denom == 0) return std::nullopt;
  Vec2 d = q1 - p1;
  double t = cross(d, s) / denom;
  double u = cross(d, r) / denom;
  // Half-open on the far end so a crossing at a shared vertex counts once.
  if (t < 0 || t >= 1 || u < 0 || u >= 1) return std::nullopt;
  return std::make_pair(t, u);
}

inline double min_distance_between(const PolyCurve& A, const SegmentGrid& gridA,
                                   const PolyCurve& B) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : B.pts) best = std::min(best, gridA.nearest(p, best).distance);
  return best;
}

}  // namespace detail

/// All transversal intersections between two polylines, with intersection
/// angles and the signed clearance used by the tangency bisection.
inline CrossingReport crossings(const PolyCurve& A, const PolyCurve& B) {
  CrossingReport rep;
  if (A.empty() || B.empty()) return rep;
  SegmentGrid gridA(A);
  std::vector<std::size_t> cand;
  for (std::size_t j = 0; j + 1 < B.size(); ++j) {
    if (!B.segment_valid(j)) continue;
    Point2 q1 = B.pts[j], q2 = B.pts[j + 1];
    Point2 mid = (q1 + q2) * 0.5;
    double radius = 0.5 * dist(q1, q2) + 1e-12;
    gridA.gather(mid, radius + gridA.cell_size(), cand);
    for (std::size_t i : cand) {
      auto hit = detail::segment_intersection(A.pts[i], A.pts[i + 1], q1, q2);
      if (!hit) continue;
      Crossing c;
      c.seg_a = i;
      c.frac_a = hit->first;
      c.seg_b = j;
      c.frac_b = hit->second;
      c.point = A.pts[i] + (A.pts[i + 1] - A.pts[i]) * hit->first;
      Vec2 ta = A.tangents.empty() ? (A.pts[i + 1] - A.pts[i])
                                   : sample_segment(A, i, hit->first).tangent;
      Vec2 tb = B.tangents.empty() ? (q2 - q1) : sample_segment(B, j, hit->second).tangent;
      c.angle = line_angle(ta, tb);
      rep.points.push_back(c);
    }
  }
  std::sort(rep.points.begin(), rep.points.end(), [](const Crossing& x, const Crossing& y) {
    return x.seg_a + x.frac_a < y.seg_a + y.frac_a;
  });
  rep.count = static_cast<int>(rep.points.size());

  if (rep.count == 0) {
    SegmentGrid gridB(B);
    rep.min_clearance = std::min(detail::min_distance_between(A, gridA, B),
                                 detail::min_distance_between(B, gridB, A));
    return rep;
  }

  // Penetration depth: for each pair of consecutive crossings along A, the
  // deepest excursion of the enclosed arc of A beyond B (and symmetrically
  // for B). This keeps the clearance continuous through a tangency.
  SegmentGrid gridB(B);
  double depth = 0;
  auto arc_depth = [&](const PolyCurve& C, const SegmentGrid& other_grid, double key_lo,
                       double key_hi) {
    double worst = 0;
    std::size_t lo = static_cast<std::size_t>(std::ceil(key_lo));
    std::size_t hi = static_cast<std::size_t>(std::floor(key_hi));
    if (hi >= C.size()) hi = C.size() - 1;
    // Subsampled: the depth feeds a sign-based bisection, not a metric claim.
    std::size_t stride = std::max<std::size_t>(1, (hi > lo ? hi - lo : 0) / 64);
    for (std::size_t v = lo; v <= hi && v < C.size(); v += stride) {
      if (static_cast<double>(v) <= key_lo || static_cast<double>(v) >= key_hi) continue;
      worst = std::max(worst, other_grid.nearest(C.pts[v]).distance);
    }
    return worst;
  };
  for (std::size_t k = 0; k + 1 < rep.points.size(); ++k) {
    const Crossing& c0 = rep.points[k];
    const Crossing& c1 = rep.points[k + 1];
    // Only arcs within one component of A.
    bool same = true;
    for (std::size_t s = c0.seg_a; s < c1.seg_a; ++s)
      if (!A.segment_valid(s)) same = false;
    if (!same) continue;
    depth = std::max(depth, arc_depth(A, gridB, c0.seg_a + c0.frac_a, c1.seg_a + c1.frac_a));
  }
  std::vector<Crossing> byB = rep.points;
  std::sort(byB.begin(), byB.end(), [](const Crossing& x, const Crossing& y) {
    return x.seg_b + x.frac_b < y.seg_b + y.frac_b;
  });
  for (std::size_t k = 0; k + 1 < byB.size(); ++k) {
    bool same = true;
    for (std::size_t s = byB[k].seg_b; s < byB[k + 1].seg_b; ++s)
      if (!B.segment_valid(s)) same = false;
    if (!same) continue;
    depth = std::max(depth, arc_depth(B, gridA, byB[k].seg_b + byB[k].frac_b,
                                      byB[k + 1].seg_b + byB[k + 1].frac_b));
  }
  rep.min_clearance = -std::max(depth, 1e-15);
  return rep;
}

}  // namespace hypbound
