#include <cmath>
#include <numbers>

#include "doctest.h"

#include "bipot/error.hpp"
#include "bipot/kernel.hpp"
#include "bipot/numerics.hpp"

using namespace bipot;
using std::numbers::pi;

namespace {

// Radial integral int_0^R phi(r) dr split into log-spaced GL panels, so
// integrable power singularities at 0 are resolved.
template <class F>
double radial_integral(F&& phi, double r_lo, double r_hi, int panels = 400) {
  const GaussRule& rule = gauss_rule(20);
  double total = 0.0;
  const double a = std::log(r_lo);
  const double b = std::log(r_hi);
  for (int i = 0; i < panels; ++i) {
    const double u0 = a + (b - a) * i / panels;
    const double u1 = a + (b - a) * (i + 1) / panels;
    total += integrate_gauss([&](double u) { return phi(std::exp(u)) * std::exp(u); }, u0, u1,
                             rule);
  }
  return total;
}

}  // namespace

TEST_CASE("Yukawa closed forms in dimensions three and two") {
  const BesselKernel g3(PotentialParams(3, 2.0));
  const BesselKernel g2(PotentialParams(2, 1.0));
  for (double r : {1e-6, 1e-3, 0.01, 0.5, 1.0, 3.0, 10.0, 30.0}) {
    const double y3 = std::exp(-r) / (4.0 * pi * r);
    const double y2 = std::exp(-r) / (2.0 * pi * r);
    CHECK(g3(r) == doctest::Approx(y3).epsilon(1e-8));
    CHECK(g2(r) == doctest::Approx(y2).epsilon(1e-8));
  }
}

TEST_CASE("subordination integral matches the modified Bessel closed form") {
  for (auto [n, s] : {std::pair{1, 0.5}, {1, 0.25}, {2, 0.5}, {2, 1.5}, {3, 1.2}, {3, 0.7}}) {
    const PotentialParams params(n, s);
    const BesselKernel g(params);
    for (double r : {1e-8, 1e-5, 0.01, 0.3, 1.0, 4.0, 15.0}) {
      CHECK(g(r) == doctest::Approx(bessel_kernel_closed_form(params, r)).epsilon(1e-8));
    }
  }
}

TEST_CASE("kernel has unit mass") {
  for (auto [n, s] : {std::pair{1, 0.5}, {2, 1.0}, {3, 2.0}, {3, 0.8}}) {
    const PotentialParams params(n, s);
    const double omega = unit_sphere_area(n);
    // Analytic small-r piece: G ~ c1 r^{s-n} below r_lo.
    const double r_lo = 1e-12;
    const double c1 = BesselKernel(params).small_radius_constant();
    const double head = omega * c1 * std::pow(r_lo, s) / s;
    const double body = radial_integral(
        [&](double r) {
          return omega * std::pow(r, n - 1) * bessel_kernel_closed_form(params, r);
        },
        r_lo, 80.0);
    CHECK(head + body == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("one-dimensional Fourier transform is (1 + 4 pi^2 xi^2)^{-s/2}") {
  const PotentialParams params(1, 0.5);
  const KernelTable table(params);
  for (double xi : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    const double c1 = table.exact().small_radius_constant();
    const double r_lo = 1e-8;
    const double head = 2.0 * c1 * std::pow(r_lo, 0.5) / 0.5;
    const double body = 2.0 * radial_integral(
                                  [&](double r) { return table(r) * std::cos(2 * pi * xi * r); },
                                  r_lo, 60.0, 3000);
    const double expected = std::pow(1.0 + 4.0 * pi * pi * xi * xi, -0.25);
    CHECK(head + body == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("small-radius constant") {
  // n = 1, s = 1/2: Gamma(1/4) / (sqrt(2 pi) Gamma(1/4)).
  const BesselKernel g(PotentialParams(1, 0.5));
  CHECK(g.small_radius_constant() == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(g(1e-8) * std::pow(1e-8, 0.5) == doctest::Approx(0.3989422804014327).epsilon(1e-3));
}

TEST_CASE("kernel is positive and decreasing") {
  const KernelTable g(PotentialParams(2, 0.5));
  double prev = g(kKernelRadiusFloor);
  for (double r : log_spaced(2e-8, 50.0, 500)) {
    const double v = g(r);
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("interpolated table agrees with direct evaluation") {
  for (auto [n, s] : {std::pair{1, 0.5}, {2, 1.0}, {3, 1.5}}) {
    const KernelTable table(PotentialParams(n, s));
    for (double r : log_spaced(1.3e-8, 63.0, 137)) {
      CHECK(table(r) == doctest::Approx(table.exact()(r)).epsilon(1e-7));
    }
  }
}

TEST_CASE("fitted kernel constants") {
  const PotentialParams params(1, 0.5);
  const KernelConstants a = fit_kernel_constants(params, {}, 200);
  const KernelConstants b = fit_kernel_constants(params, {}, 400);
  CHECK(a.c_lower > 0.0);
  CHECK_FALSE(a.lower_degenerate);
  CHECK(a.c_small >= a.c_lower);
  CHECK(a.decay_r_squared >= 0.98);
  CHECK(a.c_decay == doctest::Approx(1.0).epsilon(0.1));
  CHECK(a.c_small == doctest::Approx(b.c_small).epsilon(1e-3));
  CHECK(a.c_lower == doctest::Approx(b.c_lower).epsilon(1e-2));
  CHECK(a.c_decay == doctest::Approx(b.c_decay).epsilon(1e-2));
  const BesselKernel g(params);
  for (double r = 1.0; r <= 10.0; r += 0.37) {
    CHECK(g(r) <= a.c_large * std::exp(-a.c_decay * r) * (1 + 1e-12));
  }
}

TEST_CASE("Riesz kernel") {
  CHECK(eval_riesz_kernel(PotentialParams(1, 0.5), 4.0) == doctest::Approx(0.5));
  CHECK(eval_riesz_kernel(PotentialParams(3, 1.0), 2.0) == doctest::Approx(0.25));
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(PotentialParams(4, 1.0), DomainError);
  CHECK_THROWS_AS(PotentialParams(2, 2.0), DomainError);
  CHECK_THROWS_AS(PotentialParams(1, 0.0), DomainError);
  const PotentialParams ok(1, 0.5);
  CHECK_THROWS_AS(eval_bessel_kernel(ok, {}, 1e-9), DomainError);
  CHECK_THROWS_AS(eval_bessel_kernel(ok, {}, 0.0), DomainError);
  KernelEvalSpec bad;
  bad.t_min = 2e3;
  CHECK_THROWS_AS(eval_bessel_kernel(ok, bad, 1.0), DomainError);
  KernelEvalSpec coarse;
  coarse.subordination_nodes = 16;
  coarse.tolerance = 1e-14;
  CHECK_THROWS_AS(eval_bessel_kernel(ok, coarse, 1e-4), QuadratureError);
}
