#include <cmath>
#include <numbers>

#include "doctest.h"

#include "bipot/error.hpp"
#include "bipot/funcfam.hpp"
#include "bipot/kernel.hpp"
#include "bipot/numerics.hpp"

using namespace bipot;
using std::numbers::pi;
using F = AnalyticFunction;

TEST_CASE("pointwise values") {
  CHECK(F::power_log(0.5, 2.0)(Point(std::exp(-1.0))) ==
        doctest::Approx(std::exp(0.5) / 4.0).epsilon(1e-14));
  CHECK(F::power_log(1.0 / 3.0, 1.0)(Point(-0.125)) ==
        doctest::Approx(2.0 / (1.0 + 3.0 * std::log(2.0))).epsilon(1e-14));
  CHECK(F::power_log(0.5, 1.0, 0.25)(Point(0.3)) == 0.0);
  CHECK(F::power_log(0.5, 1.0)(Point(0.0)) == 0.0);
  CHECK(F::power_log(0.0, 0.0)(Point(0.0)) == 1.0);

  CHECK(F::indicator(1.0)(Point(0.999)) == 1.0);
  CHECK(F::indicator(1.0)(Point(1.0)) == 0.0);
  CHECK(F::indicator(0.5, Point{1.0, 1.0})(Point{1.2, 0.9}) == 1.0);
  CHECK(F::indicator(0.5, Point{1.0, 1.0})(Point{0.0, 0.0}) == 0.0);

  const F bump = F::smooth_bump(0.5, 1.0);
  CHECK(bump(Point(0.5)) == 1.0);
  CHECK(bump(Point(0.75)) == doctest::Approx(0.5));
  CHECK(bump(Point(1.0)) == 0.0);

  const F d = F::dilate(bump, 4.0, 0.5);
  CHECK(d(Point(0.1)) == doctest::Approx(2.0));
  CHECK(d(Point(0.1875)) == doctest::Approx(1.0));
  CHECK(d.support_radius() == doctest::Approx(0.25));

  CHECK(F::mollifier(0.5)(Point{0.1, 0.1}) == doctest::Approx(4.0 / pi));
  CHECK(F::constant(-2.5)(Point{3.0, 4.0, 5.0}) == -2.5);
}

TEST_CASE("power_log is nonincreasing when a >= b") {
  for (auto [a, b] : {std::pair{0.5, 0.5}, {1.0, 0.3}, {0.25, 0.0}}) {
    const F f = F::power_log(a, b);
    double prev = std::numeric_limits<double>::infinity();
    for (double r : log_spaced(1e-12, 0.999, 400)) {
      const double v = f.radial(r, 1);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("closed-form L^p norms") {
  CHECK(lp_norm_analytic(F::indicator(2.0), 2, 2.0) == doctest::Approx(std::sqrt(4.0 * pi)));
  CHECK(lp_norm_analytic(F::indicator(1.0, Point{3.0}), 1, 1.0) == doctest::Approx(2.0));
  for (int n = 1; n <= 3; ++n) {
    CHECK(lp_norm_analytic(F::mollifier(0.01), n, 1.0) == doctest::Approx(1.0));
  }
  CHECK(lp_norm_analytic(F::constant(0.0), 1, 2.0) == 0.0);
  CHECK(std::isinf(lp_norm_analytic(F::constant(1.0), 1, 2.0)));
  CHECK(lp_norm_analytic(F::constant(-3.0), 2, INFINITY) == 3.0);
}

TEST_CASE("numerical L^p norms") {
  // int_R bump = inner + outer for the quintic taper.
  CHECK(lp_norm_analytic(F::smooth_bump(0.5, 1.0), 1, 1.0) == doctest::Approx(1.5).epsilon(1e-10));
  // Ball of radius 0.5 plus shell taper, checked in 3D against a slab sum.
  // int |x|^{-1} L^{-2} on (-1, 1) = 2 / (2 - 1).
  CHECK(lp_norm_analytic(F::power_log(0.5, 1.0), 1, 2.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
  // Critical log exponent: b p = 1 gives infinity.
  CHECK(std::isinf(lp_norm_analytic(F::power_log(0.5, 0.5), 1, 2.0)));
  // Power above critical.
  CHECK(std::isinf(lp_norm_analytic(F::power_log(0.8, 0.0), 1, 2.0)));
  // Subcritical power in 3D: int_B |x|^{-2} = 4 pi.
  CHECK(lp_norm_analytic(F::power_log(1.0, 0.0), 3, 2.0) ==
        doctest::Approx(std::sqrt(4.0 * pi)).epsilon(1e-9));
  CHECK(std::isinf(lp_norm_analytic(F::power_log(0.1, 0.0), 1, INFINITY)));
}

TEST_CASE("L^p-normalised dilation preserves the norm") {
  for (int n = 1; n <= 3; ++n) {
    for (double p : {1.0, 1.5, 4.0}) {
      const F base = F::smooth_bump(0.3, 1.0);
      const double ref = lp_norm_analytic(base, n, p);
      for (double lambda : {0.25, 3.0, 10.0}) {
        const F d = F::dilate(base, lambda, n / p);
        CHECK(lp_norm_analytic(d, n, p) == doctest::Approx(ref).epsilon(1e-6));
      }
    }
  }
  const F off = F::indicator(0.25, Point{0.5, 0.5});
  CHECK(lp_norm_analytic(F::dilate(off, 7.0, 2.0 / 3.0), 2, 3.0) ==
        doctest::Approx(lp_norm_analytic(off, 2, 3.0)));
}

TEST_CASE("encoding round trip") {
  const F nested = F::dilate(F::dilate(F::smooth_bump(0.25, 0.75), 3.0, 0.5), 0.1, 1.0 / 3.0);
  for (const F& f : {F::indicator(1.5), F::indicator(0.5, Point{0.1, -0.2}),
                     F::power_log(0.25, 0.4, 0.125), nested, F::mollifier(1e-3),
                     F::constant(2.0)}) {
    const std::string text = f.encode();
    const F back = F::decode(text);
    CHECK(back.encode() == text);
    for (double x : {-0.6, -0.01, 0.0, 0.02, 0.3, 0.7}) {
      Point p = Point::origin(2);
      p[0] = x;
      p[1] = 0.5 * x;
      CHECK(back(p) == f(p));
    }
  }
  CHECK_THROWS_AS(F::decode("indicator(radius=1"), ParseError);
  CHECK_THROWS_AS(F::decode("gaussian(width=1)"), ParseError);
  CHECK_THROWS_AS(F::decode("indicator(radius=1,color=2)"), ParseError);
  CHECK_THROWS_AS(F::decode("indicator(radius=-1)"), DomainError);
}

TEST_CASE("invalid constructions") {
  CHECK_THROWS_AS(F::power_log(0.5, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(F::smooth_bump(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(F::mollifier(0.0), DomainError);
  CHECK_THROWS_AS(F::dilate(F::constant(1.0), -1.0, 0.0), DomainError);
  CHECK_THROWS_AS(lp_norm_analytic(F::constant(1.0), 1, 0.0), DomainError);
}
