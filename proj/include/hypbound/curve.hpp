#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypbound/geometry.hpp"

namespace hypbound {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Adaptive polyline with per-vertex tangent and signed curvature data.
/// Multi-arc curves (e.g. a manifold clipped to a window) store arc
/// boundaries in component_starts; the arclength parameter restarts at
/// every arc and is strictly increasing within one.
struct PolyCurve {
  std::vector<Point2> pts;
  std::vector<Vec2> tangents;        // unit
  std::vector<double> curvatures;    // signed, left turn positive
  std::vector<double> param;         // cumulative arclength within component
  std::vector<std::size_t> component_starts{0};
  std::string tag;

  std::size_t size() const { return pts.size(); }
  bool empty() const { return pts.empty(); }

  std::size_t component_count() const {
    return pts.empty() ? 0 : component_starts.size();
  }
  std::pair<std::size_t, std::size_t> component_range(std::size_t c) const {
    std::size_t lo = component_starts[c];
    std::size_t hi = (c + 1 < component_starts.size()) ? component_starts[c + 1] : pts.size();
    return {lo, hi};
  }
  /// True when vertices i and i+1 belong to the same arc.
  bool segment_valid(std::size_t i) const {
    if (i + 1 >= pts.size()) return false;
    for (std::size_t s : component_starts)
      if (s == i + 1) return false;
    return true;
  }

  double length() const {
    double L = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      if (segment_valid(i)) L += dist(pts[i], pts[i + 1]);
    return L;
  }

  /// Rebuild param/tangent/curvature from the raw vertices. Tangents come
  /// from arclength central differences, curvature from the second-order
  /// difference of the same parametrization. Growth code overwrites these
  /// with analytically pushed values; this is the fallback for imported data.
  void recompute_geometry() {
    const std::size_t n = pts.size();
    tangents.assign(n, Vec2{1, 0});
    curvatures.assign(n, 0.0);
    param.assign(n, 0.0);
    for (std::size_t c = 0; c < component_count(); ++c) {
      auto [lo, hi] = component_range(c);
      if (hi - lo == 0) continue;
      param[lo] = 0.0;
      for (std::size_t i = lo + 1; i < hi; ++i)
        param[i] = param[i - 1] + dist(pts[i - 1], pts[i]);
      for (std::size_t i = lo; i < hi; ++i) {
        Vec2 t;
        if (i == lo && i + 1 < hi) t = pts[i + 1] - pts[i];
        else if (i + 1 == hi && i > lo) t = pts[i] - pts[i - 1];
        else if (i > lo && i + 1 < hi) t = pts[i + 1] - pts[i - 1];
        else t = Vec2{1, 0};
        tangents[i] = t.normalized();
      }
      for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        curvatures[i] = curvature_fd_at(i);
      }
      if (hi - lo >= 3) {
        curvatures[lo] = curvatures[lo + 1];
        curvatures[hi - 1] = curvatures[hi - 2];
      }
    }
  }

  /// Curvature at an interior vertex by central differences on the
  /// arclength parametrization.
  double curvature_fd_at(std::size_t i) const {
    double h1 = dist(pts[i], pts[i - 1]);
    double h2 = dist(pts[i + 1], pts[i]);
    if (h1 < 1e-300 || h2 < 1e-300) throw Error("singular parametrization");
    // Unequal-spacing first and second derivatives in arclength.
    Vec2 d1 = (pts[i + 1] - pts[i]) * (h1 / (h2 * (h1 + h2))) +
              (pts[i] - pts[i - 1]) * (h2 / (h1 * (h1 + h2)));
    Vec2 d2 = (pts[i + 1] - pts[i]) * (2.0 / (h2 * (h1 + h2))) -
              (pts[i] - pts[i - 1]) * (2.0 / (h1 * (h1 + h2)));
    double dn = d1.norm();
    if (dn < 1e-12) throw Error("singular parametrization");
    return cross(d1, d2) / (dn * dn * dn);
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "t,x,y,tx,ty,kappa\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out << fmt17(param[i]) << ',' << fmt17(pts[i].x) << ',' << fmt17(pts[i].y) << ','
          << fmt17(tangents[i].x) << ',' << fmt17(tangents[i].y) << ','
          << fmt17(curvatures[i]) << '\n';
    }
  }

  static PolyCurve read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    PolyCurve c;
    std::string line;
    std::getline(in, line);  // header
    double prev_t = std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
      double t, x, y, tx, ty, k;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &t, &x, &y, &tx, &ty, &k) != 6)
        continue;
      if (t <= prev_t && !c.pts.empty()) c.component_starts.push_back(c.pts.size());
      prev_t = t;
      c.pts.push_back({x, y});
      c.tangents.push_back({tx, ty});
      c.curvatures.push_back(k);
      c.param.push_back(t);
    }
    return c;
  }
};

/// Location of the closest approach of a polyline to a query point.
struct CurveProjection {
  double distance = std::numeric_limits<double>::infinity();
  std::size_t seg = 0;    // segment index (vertex i to i+1)
  double frac = 0;        // position within the segment
  Point2 point;           // closest point
};

inline CurveProjection project_to_segment(Point2 p, Point2 a, Point2 b) {
  Vec2 ab = b - a;
  double L2 = ab.norm2();
  double u = (L2 > 0) ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
  CurveProjection r;
  r.frac = u;
  r.point = a + ab * u;
  r.distance = dist(p, r.point);
  return r;
}

/// Uniform hash grid over the segments of a polyline; supports nearest
/// queries and pair enumeration without the quadratic scan.
class SegmentGrid {
 public:
  explicit SegmentGrid(const PolyCurve& c, double cell = 0.0) : curve_(&c) {
    double total = 0;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if (c.segment_valid(i)) {
        total += dist(c.pts[i], c.pts[i + 1]);
        ++nseg_;
      }
    for (const auto& p : c.pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    extent_ = c.pts.empty() ? 1.0 : std::max(xmax - xmin, ymax - ymin) + 1.0;
    cell_ = cell > 0 ? cell : std::max(nseg_ ? 4.0 * total / nseg_ : 0.1, 1e-3);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      if (!c.segment_valid(i)) continue;
      insert_segment(i, c.pts[i], c.pts[i + 1]);
    }
  }

  double cell_size() const { return cell_; }

  /// Segment indices whose cells intersect the disc around p of the radius.
  void gather(Point2 p, double radius, std::vector<std::size_t>& out) const {
    out.clear();
    long x0 = key_of(p.x - radius), x1 = key_of(p.x + radius);
    long y0 = key_of(p.y - radius), y1 = key_of(p.y + radius);
    for (long cx = x0; cx <= x1; ++cx)
      for (long cy = y0; cy <= y1; ++cy) {
        auto it = cells_.find(pack(cx, cy));
        if (it == cells_.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  /// Closest approach of the grid's polyline to p, searched in expanding
  /// rings. Distances above upper_bound are not resolved (the projection
  /// comes back empty at infinity), which lets batch queries prune.
  CurveProjection nearest(Point2 p,
                          double upper_bound = std::numeric_limits<double>::infinity()) const {
    CurveProjection best;
    std::vector<std::size_t> cand;
    double radius = cell_;
    for (int ring = 0; ring < 64; ++ring) {
      double span = 2.0 * radius / cell_;
      if (span * span > static_cast<double>(nseg_) || radius >= 0.5 * extent_) {
        return brute_nearest(p, best, upper_bound);
      }
      gather(p, radius, cand);
      for (std::size_t s : cand) {
        auto pr = project_to_segment(p, curve_->pts[s], curve_->pts[s + 1]);
        if (pr.distance < best.distance) {
          best = pr;
          best.seg = s;
        }
      }
      if (best.distance <= radius) return best;
      if (radius > upper_bound) return best;  // caller only cares below the bound
      radius *= 2.0;
    }
    return brute_nearest(p, best, upper_bound);
  }

 private:
  CurveProjection brute_nearest(Point2 p, CurveProjection best, double) const {
    for (std::size_t i = 0; i + 1 < curve_->size(); ++i) {
      if (!curve_->segment_valid(i)) continue;
      auto pr = project_to_segment(p, curve_->pts[i], curve_->pts[i + 1]);
      if (pr.distance < best.distance) {
        best = pr;
        best.seg = i;
      }
    }
    return best;
  }

  void insert_segment(std::size_t idx, Point2 a, Point2 b) {
    long x0 = key_of(std::min(a.x, b.x)), x1 = key_of(std::max(a.x, b.x));
    long y0 = key_of(std::min(a.y, b.y)), y1 = key_of(std::max(a.y, b.y));
    for (long cx = x0; cx <= x1; ++cx)
      for (long cy = y0; cy <= y1; ++cy) cells_[pack(cx, cy)].push_back(idx);
  }
  long key_of(double v) const { return static_cast<long>(std::floor(v / cell_)); }
  static std::uint64_t pack(long x, long y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
  }

  const PolyCurve* curve_;
  double cell_;
  double extent_ = 1.0;
  std::size_t nseg_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Interpolated curve sample: position linear, tangent by angle
/// interpolation (second-order accurate since d(theta)/ds = kappa).
struct CurveSample {
  Point2 point;
  Vec2 tangent;
  double curvature = 0;
};

inline CurveSample sample_segment(const PolyCurve& c, std::size_t seg, double frac) {
  CurveSample s;
  s.point = c.pts[seg] + (c.pts[seg + 1] - c.pts[seg]) * frac;
  double th0 = std::atan2(c.tangents[seg].y, c.tangents[seg].x);
  double th1 = std::atan2(c.tangents[seg + 1].y, c.tangents[seg + 1].x);
  double d = th1 - th0;
  while (d > M_PI) d -= 2 * M_PI;
  while (d < -M_PI) d += 2 * M_PI;
  double th = th0 + frac * d;
  s.tangent = {std::cos(th), std::sin(th)};
  s.curvature = c.curvatures[seg] + frac * (c.curvatures[seg + 1] - c.curvatures[seg]);
  return s;
}

/// One-sided Hausdorff distance: sup over the samples of the distance to
/// the polyline.
inline double max_dist_to_curve(const std::vector<Point2>& samples, const PolyCurve& c) {
  SegmentGrid grid(c);
  double worst = 0;
  for (const auto& p : samples) worst = std::max(worst, grid.nearest(p).distance);
  return worst;
}

/// Sub-curve of the vertices satisfying a predicate; consecutive runs become
/// components, per-vertex data carried over.
template <typename Pred>
PolyCurve filter_curve(const PolyCurve& c, Pred keep) {
  PolyCurve out;
  out.tag = c.tag;
  out.component_starts.clear();
  for (std::size_t k = 0; k < c.component_count(); ++k) {
    auto [lo, hi] = c.component_range(k);
    bool open = false;
    std::size_t run_start = 0;
    for (std::size_t i = lo; i <= hi; ++i) {
      bool in = i < hi && keep(c.pts[i]);
      if (in && !open) {
        open = true;
        run_start = out.pts.size();
        out.component_starts.push_back(run_start);
      }
      if (in) {
        out.pts.push_back(c.pts[i]);
        if (i < c.tangents.size()) out.tangents.push_back(c.tangents[i]);
        if (i < c.curvatures.size()) out.curvatures.push_back(c.curvatures[i]);
      } else if (open) {
        open = false;
        if (out.pts.size() - run_start < 2) {  // drop single-vertex runs
          out.pts.resize(run_start);
          if (!out.tangents.empty()) out.tangents.resize(std::min(out.tangents.size(), run_start));
          if (!out.curvatures.empty())
            out.curvatures.resize(std::min(out.curvatures.size(), run_start));
          out.component_starts.pop_back();
        }
      }
    }
  }
  if (out.component_starts.empty()) out.component_starts.push_back(0);
  out.param.assign(out.pts.size(), 0.0);
  for (std::size_t k = 0; k < out.component_count(); ++k) {
    auto [lo, hi] = out.component_range(k);
    for (std::size_t i = lo + 1; i < hi; ++i)
      out.param[i] = out.param[i - 1] + dist(out.pts[i - 1], out.pts[i]);
  }
  return out;
}

}  // namespace hypbound
