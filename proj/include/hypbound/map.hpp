#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypbound/geometry.hpp"

namespace hypbound {

/// Gradient of one perturbation component with respect to (x, y, a).
struct Grad3 {
  double dx = 0, dy = 0, da = 0;
};

/// C2 perturbation of the quadratic family. Derivative suppliers are
/// analytic: curvature pushforward consumes exact second derivatives, so
/// nothing in here may finite-difference internally.
class Perturbation {
 public:
  virtual ~Perturbation() = default;

  virtual Vec2 value(double x, double y, double a) const = 0;
  /// Row i is the gradient of phi_i.
  virtual std::array<Grad3, 2> gradient(double x, double y, double a) const = 0;
  /// Hessians of phi_1 and phi_2 in the (x, y) variables at fixed a.
  virtual std::array<Mat2, 2> hessian(double x, double y, double a) const = 0;

  /// Exact inverse correction, when the family ships one; the map falls
  /// back to Newton otherwise.
  virtual std::optional<Point2> inverse_hint(Point2 /*z*/, double /*a*/,
                                             double /*b*/) const {
    return std::nullopt;
  }
};

class ZeroPerturbation final : public Perturbation {
 public:
  Vec2 value(double, double, double) const override { return {0, 0}; }
  std::array<Grad3, 2> gradient(double, double, double) const override { return {}; }
  std::array<Mat2, 2> hessian(double, double, double) const override { return {}; }
};

/// Smooth trigonometric bump s * (sin(3x) cos(2y), cos(x) sin(y)).
class BumpPerturbation final : public Perturbation {
 public:
  explicit BumpPerturbation(double s) : s_(s) {}

  Vec2 value(double x, double y, double) const override {
    return {s_ * std::sin(3 * x) * std::cos(2 * y), s_ * std::cos(x) * std::sin(y)};
  }
  std::array<Grad3, 2> gradient(double x, double y, double) const override {
    std::array<Grad3, 2> g;
    g[0] = {s_ * 3 * std::cos(3 * x) * std::cos(2 * y),
            s_ * -2 * std::sin(3 * x) * std::sin(2 * y), 0};
    g[1] = {s_ * -std::sin(x) * std::sin(y), s_ * std::cos(x) * std::cos(y), 0};
    return g;
  }
  std::array<Mat2, 2> hessian(double x, double y, double) const override {
    std::array<Mat2, 2> h;
    h[0] = Mat2{s_ * -9 * std::sin(3 * x) * std::cos(2 * y),
                s_ * -6 * std::cos(3 * x) * std::sin(2 * y),
                s_ * -6 * std::cos(3 * x) * std::sin(2 * y),
                s_ * -4 * std::sin(3 * x) * std::cos(2 * y)};
    h[1] = Mat2{s_ * -std::cos(x) * std::sin(y), s_ * -std::sin(x) * std::cos(y),
                s_ * -std::sin(x) * std::cos(y), s_ * -std::cos(x) * std::sin(y)};
    return h;
  }

 private:
  double s_;
};

inline std::shared_ptr<const Perturbation> make_perturbation(
    const std::string& name, const std::vector<double>& params) {
  if (name.empty() || name == "zero") return std::make_shared<ZeroPerturbation>();
  if (name == "bump") {
    double s = params.empty() ? 1e-3 : params[0];
    return std::make_shared<BumpPerturbation>(s);
  }
  throw Error("unknown perturbation: " + name);
}

struct MapParams {
  double a = 2.0;
  double b = 0.05;                  // must be nonzero for invertibility
  double eta_bound = 0.0;           // declared C2 bound of the perturbation
  std::string perturbation = "zero";
  std::vector<double> perturbation_params{};
  Rect window{-2.0, 2.0, -2.0, 2.0};  // analysis window
  double blowup = 1e6;                // orbit escape threshold
};

struct Orbit {
  std::vector<Point2> points;
  bool left_window = false;  // orbit exceeded the blow-up bound and stopped
};

struct EtaMeasurement {
  double declared = 0;
  double measured = 0;   // grid sup of |phi|, |grad phi|, |D2 phi| entries
  bool within_bound = true;
};

/// The planar family (1 - a x^2 + y, b x) + phi(x, y, a) with analytic
/// derivatives and the closed-form inverse for phi = 0.
class HenonMap {
 public:
  explicit HenonMap(MapParams p)
      : params_(std::move(p)),
        phi_(make_perturbation(params_.perturbation, params_.perturbation_params)) {}

  HenonMap(MapParams p, std::shared_ptr<const Perturbation> phi)
      : params_(std::move(p)), phi_(std::move(phi)) {}

  const MapParams& params() const { return params_; }
  double a() const { return params_.a; }
  double b() const { return params_.b; }
  const Perturbation& perturbation() const { return *phi_; }

  /// Same family at a different parameter value.
  HenonMap with_a(double a) const {
    MapParams p = params_;
    p.a = a;
    return HenonMap(p, phi_);
  }

  Point2 apply(Point2 z) const {
    Vec2 phi = phi_->value(z.x, z.y, params_.a);
    return {1.0 - params_.a * z.x * z.x + z.y + phi.x, params_.b * z.x + phi.y};
  }

  Mat2 jacobian(Point2 z) const {
    auto g = phi_->gradient(z.x, z.y, params_.a);
    return {-2.0 * params_.a * z.x + g[0].dx, 1.0 + g[0].dy,
            params_.b + g[1].dx, g[1].dy};
  }

  /// Hessians of the two coordinate functions in (x, y).
  std::array<Mat2, 2> hessian(Point2 z) const {
    auto h = phi_->hessian(z.x, z.y, params_.a);
    h[0].a00 += -2.0 * params_.a;
    return h;
  }

  bool has_inverse() const { return params_.b != 0.0; }

  Point2 apply_inverse(Point2 z) const {
    if (params_.b == 0.0) throw Error("inverse undefined for b=0");
    const double a = params_.a, b = params_.b;
    Point2 w{z.y / b, z.x - 1.0 + a * z.y * z.y / (b * b)};
    if (dynamic_cast<const ZeroPerturbation*>(phi_.get())) return w;
    if (auto hint = phi_->inverse_hint(z, a, b)) {
      w = *hint;
    }
    // Newton on apply(w) = z from the unperturbed closed form.
    for (int it = 0; it < 50; ++it) {
      Vec2 r = apply(w) - z;
      if (r.norm() < 1e-14) return w;
      w = w - jacobian(w).inverse() * r;
      if (!std::isfinite(w.x) || !std::isfinite(w.y) || std::abs(w.x) > 1e12 ||
          std::abs(w.y) > 1e12) {
        throw Error("no inverse supplied");
      }
    }
    if ((apply(w) - z).norm() < 1e-10) return w;
    throw Error("no inverse supplied");
  }

  Mat2 inverse_jacobian(Point2 z) const { return jacobian(apply_inverse(z)).inverse(); }

  /// Orbit z, f(z), ..., f^n(z) (or backward for n < 0). Stops early with
  /// the left_window flag once a coordinate passes the blow-up bound.
  Orbit iterate(Point2 z, long n) const {
    Orbit orb;
    orb.points.push_back(z);
    const long steps = n >= 0 ? n : -n;
    Point2 w = z;
    for (long i = 0; i < steps; ++i) {
      w = (n >= 0) ? apply(w) : apply_inverse(w);
      if (std::abs(w.x) > params_.blowup || std::abs(w.y) > params_.blowup) {
        orb.left_window = true;
        orb.points.push_back(w);
        break;
      }
      orb.points.push_back(w);
    }
    return orb;
  }

  /// Image of a unit tangent and signed curvature under the map:
  /// gamma_1' = Df u, gamma_1'' = D2f[u,u] + Df (kappa n).
  std::pair<Vec2, double> push_tangent_curvature(Point2 z, Vec2 u, double kappa) const {
    Mat2 M = jacobian(z);
    auto H = hessian(z);
    Vec2 v = M * u;
    Vec2 n = u.rot90();
    Vec2 acc{dot(u, H[0] * u), dot(u, H[1] * u)};
    Vec2 w = acc + M * (kappa * n);
    double vn = v.norm();
    if (vn < 1e-300) throw Error("singular pushforward");
    return {v / vn, cross(v, w) / (vn * vn * vn)};
  }

  /// Preimage-side tangent and curvature: given the curve data at z and its
  /// preimage w = f^{-1}(z), solve the forward pushforward relation for the
  /// curvature at w. Uses only forward second derivatives.
  std::pair<Vec2, double> pull_tangent_curvature(Point2 w, Vec2 u_img,
                                                 double kappa_img) const {
    Mat2 M = jacobian(w);
    Vec2 uw = (M.inverse() * u_img).normalized();
    Vec2 t = M * uw;  // parallel to u_img, length = expansion factor
    if (dot(t, u_img) < 0) {
      uw = -uw;
      t = -t;
    }
    auto H = hessian(w);
    Vec2 acc{dot(uw, H[0] * uw), dot(uw, H[1] * uw)};
    double tn = t.norm();
    double kappa_w = (kappa_img * tn * tn * tn - cross(t, acc)) / M.det();
    return {uw, kappa_w};
  }

  /// Grid sup of the perturbation's C2 data over the analysis window.
  EtaMeasurement measure_eta(int grid = 100) const {
    EtaMeasurement m;
    m.declared = params_.eta_bound;
    double sup = 0;
    const Rect& w = params_.window;
    for (int i = 0; i <= grid; ++i) {
      double x = w.xmin + w.width() * i / grid;
      for (int j = 0; j <= grid; ++j) {
        double y = w.ymin + w.height() * j / grid;
        Vec2 v = phi_->value(x, y, params_.a);
        auto g = phi_->gradient(x, y, params_.a);
        auto h = phi_->hessian(x, y, params_.a);
        sup = std::max({sup, std::abs(v.x), std::abs(v.y)});
        for (const auto& gr : g)
          sup = std::max({sup, std::abs(gr.dx), std::abs(gr.dy), std::abs(gr.da)});
        sup = std::max({sup, h[0].max_abs(), h[1].max_abs()});
      }
    }
    m.measured = sup;
    m.within_bound = m.measured <= m.declared + 1e-12;
    return m;
  }

 private:
  MapParams params_;
  std::shared_ptr<const Perturbation> phi_;
};

}  // namespace hypbound
