#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "hypbound/fixed_points.hpp"
#include "hypbound/map.hpp"

namespace hypbound {

/// One-dimensional C2 family g_a = (1 - a x^2) + (g - h). The perturbation
/// supplies value/derivative/second derivative analytically.
struct OneDPerturbation {
  std::function<double(double x, double a)> value = [](double, double) { return 0.0; };
  std::function<double(double x, double a)> d1 = [](double, double) { return 0.0; };
  std::function<double(double x, double a)> d2 = [](double, double) { return 0.0; };
  double eta = 0.0;
};

class OneDMap {
 public:
  explicit OneDMap(double a) : a_(a) {}
  OneDMap(double a, OneDPerturbation g) : a_(a), g_(std::move(g)) {}

  double a() const { return a_; }
  const OneDPerturbation& perturbation() const { return g_; }
  OneDMap with_a(double a) const { return OneDMap(a, g_); }

  double eval(double x) const { return 1.0 - a_ * x * x + g_.value(x, a_); }
  double deriv(double x) const { return -2.0 * a_ * x + g_.d1(x, a_); }
  double deriv2(double x) const { return -2.0 * a_ + g_.d2(x, a_); }

  double eval_n(double x, int n) const {
    for (int i = 0; i < n; ++i) x = eval(x);
    return x;
  }

 private:
  double a_;
  OneDPerturbation g_;
};

inline OneDFixedPoints od_fixed_points(double a) { return one_d_fixed_points(a); }

/// Fixed points of a perturbed family by Newton from the closed-form seeds.
inline OneDFixedPoints od_fixed_points(const OneDMap& m) {
  OneDFixedPoints seed = one_d_fixed_points(m.a());
  auto polish = [&](double x) {
    for (int it = 0; it < 60; ++it) {
      double r = m.eval(x) - x;
      if (std::abs(r) < 1e-14) break;
      x -= r / (m.deriv(x) - 1.0);
    }
    return x;
  };
  OneDFixedPoints out = seed;
  out.p = polish(seed.p);
  out.q = polish(seed.q);
  return out;
}

struct OneDOrbit {
  int period = 0;
  std::vector<double> points;  // the cycle, starting at its smallest member
  double multiplier = 0;       // (g^p)'
};

/// All real roots of g^p(x) = x located by sign scanning a uniform grid on
/// [-1.5, 1.5] followed by bisection and Newton polish; orbits deduplicated
/// by cyclic shift. Grid misses (root pairs inside one cell) are accepted.
inline std::vector<OneDOrbit> od_periodic_orbits(const OneDMap& m, int max_period,
                                                 int grid = 10000) {
  if (max_period > 14) throw Error("max_period above seed budget");
  std::vector<OneDOrbit> orbits;
  const double lo = -1.5, hi = 1.5;
  std::vector<double> roots;
  auto record_orbit = [&](double x, int p) {
    // Reject if the true minimal period divides p but is smaller: the orbit
    // will have been recorded at its minimal period already.
    std::vector<double> cyc{x};
    for (int i = 1; i < p; ++i) cyc.push_back(m.eval(cyc.back()));
    for (int d = 1; d < p; ++d)
      if (p % d == 0 && std::abs(m.eval_n(x, d) - x) < 1e-9) return;
    double xmin = *std::min_element(cyc.begin(), cyc.end());
    for (const auto& o : orbits)
      if (o.period == p && std::abs(o.points[0] - xmin) < 1e-7) return;
    // rotate so the smallest point leads
    while (std::abs(cyc[0] - xmin) > 1e-300) {
      std::rotate(cyc.begin(), cyc.begin() + 1, cyc.end());
      if (cyc[0] == xmin) break;
    }
    OneDOrbit orb;
    orb.period = p;
    orb.points = cyc;
    double mult = 1.0;
    for (double z : cyc) mult *= m.deriv(z);
    orb.multiplier = mult;
    orbits.push_back(orb);
  };
  for (int p = 1; p <= max_period; ++p) {
    auto F = [&](double x) { return m.eval_n(x, p) - x; };
    roots.clear();
    double prev_x = lo, prev_f = F(lo);
    for (int i = 1; i <= grid; ++i) {
      double x = lo + (hi - lo) * i / grid;
      double f = F(x);
      if (prev_f == 0.0) roots.push_back(prev_x);
      else if (prev_f * f < 0) {
        double a0 = prev_x, b0 = x, fa = prev_f;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (a0 + b0), fm = F(mid);
          if (fa * fm <= 0) b0 = mid;
          else {
            a0 = mid;
            fa = fm;
          }
        }
        roots.push_back(0.5 * (a0 + b0));
      }
      prev_x = x;
      prev_f = f;
    }
    for (double r : roots) {
      // Newton polish on the composed map.
      double x = r;
      for (int it = 0; it < 30; ++it) {
        double f = m.eval_n(x, p) - x;
        double d = 1.0;
        double z = x;
        for (int j = 0; j < p; ++j) {
          d *= m.deriv(z);
          z = m.eval(z);
        }
        if (std::abs(d - 1.0) < 1e-12) break;
        double step = f / (d - 1.0);
        x -= step;
        if (std::abs(step) < 1e-14) break;
      }
      if (std::abs(m.eval_n(x, p) - x) < 1e-9 && x >= lo - 1e-9 && x <= hi + 1e-9)
        record_orbit(x, p);
    }
  }
  return orbits;
}

/// Tangency functional: second image of the critical point minus the
/// orientation-reversing fixed point. Its root is the one-dimensional
/// analogue of the first-tangency parameter (for eta = 0 the root is 2).
inline double od_tangency_functional(const OneDMap& m) {
  double c1 = m.eval(0.0);
  double c2 = m.eval(c1);
  return c2 - od_fixed_points(m).q;
}

inline double od_a_star(const OneDMap& family, double a_lo, double a_hi,
                        double tol = 1e-10) {
  auto T = [&](double a) { return od_tangency_functional(family.with_a(a)); };
  double f_lo = T(a_lo), f_hi = T(a_hi);
  if (f_lo * f_hi > 0) throw Error("no sign change");
  while (a_hi - a_lo > tol) {
    double mid = 0.5 * (a_lo + a_hi);
    double fm = T(mid);
    if (f_lo * fm <= 0) {
      a_hi = mid;
      f_hi = fm;
    } else {
      a_lo = mid;
      f_lo = fm;
    }
  }
  return 0.5 * (a_lo + a_hi);
}

struct OneDConeReport {
  double lambda_hat = 0.55;
  double measured_C_eps = 0;  // exp of the worst segment defect
  int segments = 0;
  bool passed = true;  // every outside-segment product is positive length
};

/// Uniform expansion outside (-eps, eps): for orbit segments that stay
/// outside the critical interval, the derivative product must satisfy
/// |(g^k)'| >= C e^{lambda_hat k}; the report carries the measured C.
inline OneDConeReport od_expansion_outside(const OneDMap& m, double eps,
                                           double lambda_hat, int n_orbits,
                                           int n_steps, std::uint64_t seed = 1) {
  OneDConeReport rep;
  rep.lambda_hat = lambda_hat;
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int o = 0; o < n_orbits; ++o) {
    double x = rng.uniform(-1.0, 1.0);
    double log_gain = 0;
    int k = 0;
    for (int s = 0; s < n_steps; ++s) {
      if (std::abs(x) > 1.5) break;
      if (std::abs(x) < eps) {
        log_gain = 0;
        k = 0;
        x = m.eval(x);
        continue;
      }
      log_gain += std::log(std::abs(m.deriv(x)));
      ++k;
      worst = std::min(worst, log_gain - lambda_hat * k);
      ++rep.segments;
      x = m.eval(x);
    }
  }
  rep.measured_C_eps = std::isfinite(worst) ? std::exp(worst) : 1.0;
  return rep;
}

}  // namespace hypbound
