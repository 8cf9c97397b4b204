#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hypbound/manifolds.hpp"

namespace hypbound {

enum class TangencyCase { ReversingPQ, PreservingQQ };

/// Declared construction of the compact manifold pieces entering the
/// tangency detector. Versioned into every report for reproducibility.
struct PieceConvention {
  double unstable_arclength = 8.0;  // forward growth of the unstable piece
  int stable_generations = 2;       // backward growth of the stable piece
  double zone_width = 0.5;          // fold-zone filter behind the rightmost point
  double local_arclength = 6.0;     // W^u_loc piece for the four-crossing test
  int local_generations = 2;        // W^s_loc generations for the same
  double local_column = 0.3;        // half-width of the W^s_loc clip column
  Rect window{-2.0, 2.0, -4.0, 2.0};
  GrowthConfig growth = [] {
    GrowthConfig g;
    g.max_spacing = 2e-3;
    return g;
  }();
};

struct GapResult {
  double value = 0;      // > 0 separated, < 0 crossing
  int crossing_count = 0;
  Point2 witness_u, witness_s;  // closest pair (or first crossing point twice)
};

struct BracketStep {
  double a_lo = 0, a_hi = 0;
  double g_lo = 0, g_hi = 0;
};

struct TangencyReport {
  double a_star = 0;
  TangencyCase orientation_case = TangencyCase::ReversingPQ;
  std::vector<BracketStep> bracket_history;
  std::vector<std::pair<double, double>> gap_samples;  // 64-point sanity scan
  GapResult witness;                                   // evaluated at a_star
  double g_lo_final = 0, g_hi_final = 0;
};

namespace detail {

/// The fold piece: every sub-arc of the unstable curve within the vertical
/// zone behind its rightmost vertex. The piece excludes the fixed point, so
/// the trivial intersection of the two manifolds at the saddle never counts.
inline PolyCurve fold_zone_piece(const PolyCurve& wu, double zone_width) {
  double xmax = -std::numeric_limits<double>::infinity();
  for (const auto& p : wu.pts) xmax = std::max(xmax, p.x);
  double cut = xmax - zone_width;
  return filter_curve(wu, [cut](Point2 p) { return p.x >= cut; });
}

inline std::pair<Point2, Point2> closest_pair(const PolyCurve& A, const PolyCurve& B) {
  SegmentGrid gridB(B);
  double best = std::numeric_limits<double>::infinity();
  std::pair<Point2, Point2> out;
  for (const auto& p : A.pts) {
    auto pr = gridB.nearest(p, best);
    if (pr.distance < best) {
      best = pr.distance;
      out = {p, pr.point};
    }
  }
  return out;
}

}  // namespace detail

inline TangencyCase tangency_case(double b) {
  return b > 0 ? TangencyCase::ReversingPQ : TangencyCase::PreservingQQ;
}

/// Signed clearance between the compact tangency pieces at parameter a.
/// Positive = separated, negative = transversal crossings present (the
/// penetration depth); the first sign change as a increases is the
/// tangency parameter of the declared pieces.
inline GapResult gap(const HenonMap& family, double a,
                     const PieceConvention& conv = {}) {
  HenonMap f = family.with_a(a);
  FixedPointPair fps = find_fixed_points(f);
  PolyCurve wu = grow_unstable(f, fps.q, conv.unstable_arclength, conv.window, conv.growth);
  PolyCurve ws = grow_generations(f, fps.q, ManifoldKind::Stable,
                                  conv.stable_generations, conv.window, conv.growth);
  PolyCurve piece = detail::fold_zone_piece(wu, conv.zone_width);
  if (piece.size() < 2) throw Error("fold piece empty");
  CrossingReport rep = crossings(piece, ws);
  GapResult r;
  r.value = rep.min_clearance;
  r.crossing_count = rep.count;
  if (rep.count > 0) {
    r.witness_u = rep.points.front().point;
    r.witness_s = rep.points.front().point;
  } else {
    auto [wa, wb] = detail::closest_pair(piece, ws);
    r.witness_u = wa;
    r.witness_s = wb;
  }
  return r;
}

/// Bisection for the first-tangency parameter over [a_lo, a_hi], with a
/// 64-point sanity scan confirming a single sign change on the bracket.
inline TangencyReport find_a_star(const HenonMap& family, double a_lo, double a_hi,
                                  double tol = 1e-8, const PieceConvention& conv = {},
                                  int scan_points = 64) {
  TangencyReport rep;
  rep.orientation_case = tangency_case(family.b());
  GapResult lo = gap(family, a_lo, conv);
  GapResult hi = gap(family, a_hi, conv);
  if (!(lo.value > 0 && hi.value < 0)) throw Error("bracket has no sign change");
  if (scan_points > 1) {
    double prev = lo.value;
    int flips = 0;
    for (int i = 0; i <= scan_points; ++i) {
      double a = a_lo + (a_hi - a_lo) * i / scan_points;
      double g = (i == 0) ? lo.value : (i == scan_points ? hi.value : gap(family, a, conv).value);
      rep.gap_samples.emplace_back(a, g);
      if (g * prev < 0) ++flips;
      if (g != 0) prev = g;
    }
    if (flips > 1) throw Error("multiple sign changes");
  }
  double glo = lo.value, ghi = hi.value;
  while (a_hi - a_lo > tol) {
    rep.bracket_history.push_back({a_lo, a_hi, glo, ghi});
    double mid = 0.5 * (a_lo + a_hi);
    double gm = gap(family, mid, conv).value;
    if (gm > 0) {
      a_lo = mid;
      glo = gm;
    } else {
      a_hi = mid;
      ghi = gm;
    }
  }
  rep.bracket_history.push_back({a_lo, a_hi, glo, ghi});
  rep.a_star = 0.5 * (a_lo + a_hi);
  rep.g_lo_final = glo;
  rep.g_hi_final = ghi;
  rep.witness = gap(family, rep.a_star, conv);
  return rep;
}

/// Four-crossing predicate between the local unstable and stable pieces of
/// the case-designated fixed point, and the bisection for its onset.
inline bool four_crossings(const HenonMap& family, double a, const PieceConvention& conv) {
  HenonMap f = family.with_a(a);
  FixedPointPair fps = find_fixed_points(f);
  const FixedPointData& fp = (f.b() > 0) ? fps.p : fps.q;
  PolyCurve wu = grow_unstable(f, fp, conv.local_arclength, conv.window, conv.growth);
  Rect column{fp.location.x - conv.local_column, fp.location.x + conv.local_column,
              conv.window.ymin, conv.window.ymax};
  PolyCurve ws = grow_generations(f, fp, ManifoldKind::Stable, conv.local_generations,
                                  column, conv.growth);
  return crossings(wu, ws).count >= 4;
}

inline double find_a_hat(const HenonMap& family, double a_lo, double a_hi,
                         double tol = 1e-6, const PieceConvention& conv = {}) {
  bool lo = four_crossings(family, a_lo, conv);
  bool hi = four_crossings(family, a_hi, conv);
  if (lo == hi) throw Error("bracket");
  while (a_hi - a_lo > tol) {
    double mid = 0.5 * (a_lo + a_hi);
    if (four_crossings(family, mid, conv) == hi) a_hi = mid;
    else a_lo = mid;
  }
  return 0.5 * (a_lo + a_hi);
}

/// Named per-parameter observable; the CLI registers the diagnostic ones.
using Observable = std::function<double(const HenonMap& map_at_a)>;

struct ScanRow {
  double a = 0;
  std::vector<double> values;       // one per observable, NaN on error
  std::vector<std::string> errors;  // empty string when the column succeeded
};

struct ScanTable {
  std::vector<std::string> columns;
  std::vector<ScanRow> rows;
};

inline ScanTable scan(const HenonMap& family, const std::vector<double>& a_values,
                      const std::vector<std::pair<std::string, Observable>>& observables) {
  ScanTable table;
  for (const auto& [name, fn] : observables) table.columns.push_back(name);
  for (double a : a_values) {
    ScanRow row;
    row.a = a;
    for (const auto& [name, fn] : observables) {
      try {
        row.values.push_back(fn(family.with_a(a)));
        row.errors.emplace_back();
      } catch (const std::exception& e) {
        row.values.push_back(std::numeric_limits<double>::quiet_NaN());
        row.errors.emplace_back(e.what());
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace hypbound
