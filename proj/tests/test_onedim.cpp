#include <catch2/catch_amalgamated.hpp>

#include "hypbound/onedim.hpp"

using namespace hypbound;

TEST_CASE("one-dimensional fixed points and multipliers") {
  OneDMap m(2.0);
  OneDFixedPoints fp = od_fixed_points(m);
  CHECK(fp.p == Catch::Approx(0.5).margin(1e-12));
  CHECK(fp.q == Catch::Approx(-1.0).margin(1e-12));
  CHECK(std::abs(m.deriv(fp.q)) == Catch::Approx(4.0).margin(1e-12));

  OneDFixedPoints fp25 = od_fixed_points(OneDMap(2.5));
  CHECK(fp25.p == Catch::Approx((-1.0 + std::sqrt(11.0)) / 5.0).epsilon(1e-13));
  CHECK(fp25.q == Catch::Approx((-1.0 - std::sqrt(11.0)) / 5.0).epsilon(1e-13));

  // |multiplier at q| = |1 + sqrt(1+4a)|.
  for (double a : {2.0, 2.2, 2.5}) {
    OneDMap f(a);
    CHECK(std::abs(f.deriv(od_fixed_points(f).q)) ==
          Catch::Approx(1.0 + std::sqrt(1.0 + 4.0 * a)).margin(1e-10));
  }
}

TEST_CASE("derivative suppliers match finite differences") {
  OneDPerturbation g;
  g.value = [](double x, double) { return 1e-3 * std::sin(2 * x); };
  g.d1 = [](double x, double) { return 2e-3 * std::cos(2 * x); };
  g.d2 = [](double x, double) { return -4e-3 * std::sin(2 * x); };
  OneDMap m(2.0, g);
  Rng rng(5);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    double x = rng.uniform(-1.5, 1.5);
    double fd = (m.eval(x + h) - m.eval(x - h)) / (2 * h);
    CHECK(std::abs(m.deriv(x) - fd) / std::max(1.0, std::abs(fd)) < 1e-6);
  }
}

TEST_CASE("periodic orbits of the expanding map are uniformly expanded") {
  OneDMap m(2.2);
  auto orbits = od_periodic_orbits(m, 12);
  REQUIRE(!orbits.empty());
  bool found_fixed_q = false;
  for (const auto& o : orbits) {
    CHECK(std::abs(o.multiplier) >= std::exp(0.14 * o.period));
    if (o.period == 1 && std::abs(o.points[0] - od_fixed_points(m).q) < 1e-8)
      found_fixed_q = true;
  }
  CHECK(found_fixed_q);

  // a=2, p=1, x=-1: multiplier -2 a x = 4.
  auto fix = od_periodic_orbits(OneDMap(2.0), 1);
  bool ok = false;
  for (const auto& o : fix)
    if (std::abs(o.points[0] + 1.0) < 1e-9 && std::abs(o.multiplier - 4.0) < 1e-9) ok = true;
  CHECK(ok);
}

TEST_CASE("periodic orbits at the boundary parameter keep |mult| = 2^p") {
  // At a=2 the map is smoothly conjugate to the angle-doubling family and
  // every period-p orbit has multiplier of modulus exactly 2^p.
  auto orbits = od_periodic_orbits(OneDMap(2.0), 8);
  REQUIRE(orbits.size() >= 10);
  for (const auto& o : orbits) {
    // The interval endpoints x = +-1 sit at the conjugacy's singular points
    // and carry multiplier 2a|x| instead; skip those two orbits.
    bool endpoint = false;
    for (double z : o.points)
      if (std::abs(std::abs(z) - 1.0) < 1e-6) endpoint = true;
    if (endpoint) continue;
    CHECK(std::abs(o.multiplier) ==
          Catch::Approx(std::pow(2.0, o.period)).epsilon(1e-4));
  }
}

TEST_CASE("one-dimensional tangency parameter") {
  OneDMap base(2.0);
  double astar = od_a_star(base, 1.5, 2.5, 1e-11);
  CHECK(astar == Catch::Approx(2.0).margin(1e-10));

  // Perturbed family stays within 0.05 of 2.
  OneDPerturbation g;
  g.value = [](double x, double) { return 1e-3 * std::cos(3 * x); };
  g.d1 = [](double x, double) { return -3e-3 * std::sin(3 * x); };
  g.d2 = [](double x, double) { return -9e-3 * std::cos(3 * x); };
  double astar_p = od_a_star(OneDMap(2.0, g), 1.5, 2.5, 1e-10);
  CHECK(std::abs(astar_p - 2.0) < 0.05);

  CHECK_THROWS_WITH(od_a_star(base, 2.5, 3.0, 1e-10),
                    Catch::Matchers::ContainsSubstring("no sign change"));
}

TEST_CASE("tangency parameter is independent of bracket refinement") {
  OneDMap base(2.0);
  double a1 = od_a_star(base, 1.5, 2.5, 1e-10);
  double a2 = od_a_star(base, 1.8, 2.2, 1e-10);
  CHECK(std::abs(a1 - a2) <= 2e-10);
}

TEST_CASE("uniform expansion outside the critical interval") {
  OneDMap m(2.2);
  OneDConeReport rep = od_expansion_outside(m, 0.15, 0.55, 50, 200, 42);
  CHECK(rep.segments > 100);
  CHECK(rep.measured_C_eps > 0);
  CHECK(rep.measured_C_eps < 10.0);
}

TEST_CASE("multipliers at the computed tangency parameter stay expanding") {
  double astar = od_a_star(OneDMap(2.0), 1.5, 2.5, 1e-11);
  auto orbits = od_periodic_orbits(OneDMap(astar), 10);
  REQUIRE(orbits.size() >= 5);
  for (const auto& o : orbits) {
    if (std::abs(o.points[0] - 1.0) < 1e-6) continue;
    CHECK(std::abs(o.multiplier) >= std::exp(0.14 * o.period));
  }
}
