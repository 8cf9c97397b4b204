#include <catch2/catch_amalgamated.hpp>

#include "hypbound/map.hpp"

using namespace hypbound;

namespace {
HenonMap make_map(double a, double b, const std::string& pert = "zero",
                  std::vector<double> pp = {}) {
  MapParams p;
  p.a = a;
  p.b = b;
  p.perturbation = pert;
  p.perturbation_params = std::move(pp);
  return HenonMap(p);
}
}  // namespace

TEST_CASE("apply matches the family formula") {
  // a=2, b=0: (1,0) -> (-1,0), the orientation-reversing fixed point of the
  // one-dimensional limit.
  HenonMap f = make_map(2.0, 0.0);
  Point2 img = f.apply({1.0, 0.0});
  CHECK(img.x == -1.0);
  CHECK(img.y == 0.0);

  img = f.apply({0.0, 0.0});
  CHECK(img.x == 1.0);
  CHECK(img.y == 0.0);

  HenonMap g = make_map(2.0, 0.3);
  img = g.apply({1.0, 1.0});
  CHECK(img.x == Catch::Approx(0.0).margin(1e-15));
  CHECK(img.y == Catch::Approx(0.3));
}

TEST_CASE("inverse round-trips and the closed form") {
  HenonMap f = make_map(2.0, 0.3);
  Point2 z{0.3, -0.1};
  Point2 rt = f.apply_inverse(f.apply(z));
  CHECK(dist(rt, z) < 1e-12);

  // Invert (0, 0.3) by hand: y/b = 1, x - 1 + a y^2/b^2 = 0 - 1 + 2 = 1.
  Point2 w = f.apply_inverse({0.0, 0.3});
  CHECK(w.x == Catch::Approx(1.0));
  CHECK(w.y == Catch::Approx(1.0));

  HenonMap s = make_map(2.0, 0.0);
  CHECK_THROWS_WITH(s.apply_inverse({0.0, 0.0}), Catch::Matchers::ContainsSubstring("b=0"));
}

TEST_CASE("inverse round-trip across the window, including perturbed maps") {
  for (const std::string& pert : {std::string("zero"), std::string("bump")}) {
    HenonMap f = make_map(2.0, 0.3, pert, {1e-3});
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      Point2 z{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      CHECK(dist(f.apply(f.apply_inverse(z)), z) < 1e-10);
      CHECK(dist(f.apply_inverse(f.apply(z)), z) < 1e-10);
    }
  }
}

TEST_CASE("jacobian: closed form, spectral radius, constant determinant") {
  HenonMap f = make_map(2.0, 0.0);
  Mat2 J = f.jacobian({-1.0, 0.0});
  CHECK(J.a00 == 4.0);
  CHECK(J.a01 == 1.0);
  CHECK(J.a10 == 0.0);
  CHECK(J.a11 == 0.0);
  Eig2 e = eigen_real(J);
  CHECK(std::abs(e.lam1) == Catch::Approx(4.0));

  HenonMap g = make_map(2.0, 0.3);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Point2 z{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    CHECK(g.jacobian(z).det() == Catch::Approx(-0.3).epsilon(1e-14));
  }
}

TEST_CASE("perturbed determinant obeys the b + 12 eta envelope") {
  const double s = 2e-3;
  HenonMap f = make_map(2.0, 0.3, "bump", {s});
  double eta = f.measure_eta(100).measured;
  REQUIRE(eta > 0);
  double bound = 0.3 + 12.0 * eta;
  double worst = 0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) {
      Point2 z{-2.0 + 4.0 * i / 100, -2.0 + 4.0 * j / 100};
      worst = std::max(worst, std::abs(f.jacobian(z).det()));
    }
  CHECK(worst <= bound);
}

TEST_CASE("analytic jacobian matches central differences") {
  HenonMap f = make_map(2.0, 0.3, "bump", {1e-3});
  Rng rng(11);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    Point2 z{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Mat2 J = f.jacobian(z);
    Vec2 dx = (f.apply({z.x + h, z.y}) - f.apply({z.x - h, z.y})) / (2 * h);
    Vec2 dy = (f.apply({z.x, z.y + h}) - f.apply({z.x, z.y - h})) / (2 * h);
    double scale = std::max(1.0, J.max_abs());
    CHECK(std::abs(J.a00 - dx.x) / scale < 1e-6);
    CHECK(std::abs(J.a10 - dx.y) / scale < 1e-6);
    CHECK(std::abs(J.a01 - dy.x) / scale < 1e-6);
    CHECK(std::abs(J.a11 - dy.y) / scale < 1e-6);
  }
}

TEST_CASE("perturbation gradient matches central differences of value") {
  BumpPerturbation phi(1e-3);
  Rng rng(13);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
    auto g = phi.gradient(x, y, 2.0);
    Vec2 dx = (phi.value(x + h, y, 2.0) - phi.value(x - h, y, 2.0)) / (2 * h);
    Vec2 dy = (phi.value(x, y + h, 2.0) - phi.value(x, y - h, 2.0)) / (2 * h);
    CHECK(g[0].dx == Catch::Approx(dx.x).margin(1e-9));
    CHECK(g[1].dx == Catch::Approx(dx.y).margin(1e-9));
    CHECK(g[0].dy == Catch::Approx(dy.x).margin(1e-9));
    CHECK(g[1].dy == Catch::Approx(dy.y).margin(1e-9));
  }
}

TEST_CASE("iterate: trivial, escaping and periodic orbits") {
  HenonMap f = make_map(2.0, 0.05);
  Orbit zero = f.iterate({0.4, 0.1}, 0);
  REQUIRE(zero.points.size() == 1);
  CHECK(zero.points[0].x == 0.4);

  // Escape with |x| at least doubling outside the core.
  Orbit esc = f.iterate({-2.5, 0.0}, 3);
  REQUIRE(esc.points.size() >= 3);
  CHECK(esc.points[1].x == Catch::Approx(-11.5));
  for (std::size_t i = 0; i + 1 < esc.points.size(); ++i)
    CHECK(std::abs(esc.points[i + 1].x) >= 2.0 * std::abs(esc.points[i].x));

  HenonMap g = make_map(2.0, 0.0);
  Orbit fixed = g.iterate({1.0, 0.0}, 2);
  REQUIRE(fixed.points.size() == 3);
  CHECK(fixed.points[1].x == -1.0);
  CHECK(fixed.points[2].x == -1.0);

  // Blow-up flag set once coordinates exceed the bound.
  Orbit blow = f.iterate({-3.0, 0.0}, 100);
  CHECK(blow.left_window);
  CHECK(blow.points.size() < 100);
}

TEST_CASE("eta measurement flags a declared bound that is too small") {
  MapParams p;
  p.a = 2.0;
  p.b = 0.3;
  p.perturbation = "bump";
  p.perturbation_params = {1e-3};
  p.eta_bound = 1e-9;  // deliberately below the measured sup
  HenonMap f(p);
  EtaMeasurement m = f.measure_eta(50);
  CHECK_FALSE(m.within_bound);
  CHECK(m.measured > 1e-4);

  p.eta_bound = 1.0;
  CHECK(HenonMap(p).measure_eta(50).within_bound);
}

TEST_CASE("tangent/curvature pushforward agrees with its pullback") {
  HenonMap f = make_map(2.1, 0.2, "bump", {5e-4});
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    Point2 z{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    double th = rng.uniform(0, 2 * M_PI);
    Vec2 u{std::cos(th), std::sin(th)};
    double kappa = rng.uniform(-2, 2);
    auto [u1, k1] = f.push_tangent_curvature(z, u, kappa);
    auto [u0, k0] = f.pull_tangent_curvature(z, u1, k1);
    CHECK(std::abs(cross(u0, u)) < 1e-10);
    CHECK(k0 == Catch::Approx(kappa).margin(1e-8));
  }
}
