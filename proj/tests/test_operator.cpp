#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "bipot/error.hpp"
#include "bipot/operator.hpp"

using namespace bipot;
using std::numbers::pi;
using F = AnalyticFunction;

namespace {

// n = 1 route through z = x - y: int G(|x - z|) f(z) g(2x - z) dz, with the
// kernel singularity at z = x resolved by geometric grading.
double substitution_oracle(const PotentialParams& params, const F& f, const F& g, double x,
                           double z_lo, double z_hi) {
  const GaussRule& rule = gauss_rule(32);
  auto integrand = [&](double z) {
    return bessel_kernel_closed_form(params, std::abs(x - z)) * f(Point(z)) * g(Point(2 * x - z));
  };
  // |z - x| < delta through the small-radius asymptote c1 r^{s-1}.
  const double delta = std::ldexp(1.0, -40);
  const double c1 = BesselKernel(params).small_radius_constant();
  const double head = 2.0 * c1 * std::pow(delta, params.s) / params.s * f(Point(x)) * g(Point(x));
  std::vector<double> cuts{z_lo, z_hi};
  for (int j = 0; j <= 40; ++j) {
    cuts.push_back(x - std::ldexp(1.0, -j));
    cuts.push_back(x + std::ldexp(1.0, -j));
  }
  for (double c = z_lo; c < z_hi; c += 0.01) cuts.push_back(c);
  for (const auto& feat : f.features()) {
    cuts.push_back(feat.center[0] - feat.radius);
    cuts.push_back(feat.center[0] + feat.radius);
  }
  for (const auto& feat : g.features()) {
    cuts.push_back(2 * x - feat.center[0] - feat.radius);
    cuts.push_back(2 * x - feat.center[0] + feat.radius);
  }
  std::erase_if(cuts, [&](double c) { return std::abs(c - x) < 0.999 * delta; });
  cuts.push_back(x - delta);
  cuts.push_back(x + delta);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = std::max(cuts[i], z_lo);
    const double b = std::min(cuts[i + 1], z_hi);
    if (b > a && !(a >= x - 1.001 * delta && b <= x + 1.001 * delta)) {
      sum += integrate_gauss(integrand, a, b, rule);
    }
  }
  return sum + head;
}

}  // namespace

TEST_CASE("Riesz potential of the indicator pair at the origin is 4") {
  const PotentialParams params(1, 0.5);
  const BilinearEvalResult r = bilinear_riesz(F::indicator(1.0), F::indicator(1.0), Point(0.0), params);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK_FALSE(r.diverged);
  CHECK(r.cutoff_used == 0.0);
}

TEST_CASE("Yukawa ball integrals") {
  const BilinearEvalResult r3 = bilinear_bessel(F::indicator(1.0), F::indicator(1.0),
                                                Point{0.0, 0.0, 0.0}, PotentialParams(3, 2.0));
  CHECK(r3.value == doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-8));
  const BilinearEvalResult r2 = bilinear_bessel(F::indicator(1.0), F::indicator(1.0),
                                                Point{0.0, 0.0}, PotentialParams(2, 1.0));
  CHECK(r2.value == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("screened potential of a ball in three dimensions") {
  // u = G * 1_B solves u - Lap u = 1_B; inside u = 1 + A sinh(r)/r.
  const double R = 1.0;
  // Continuity of u and u' at R against B e^{-r}/r outside.
  const double s = std::sinh(R) / R;
  const double ds = std::cosh(R) / R - std::sinh(R) / (R * R);
  const double e = std::exp(-R) / R;
  const double de = -std::exp(-R) / R - std::exp(-R) / (R * R);
  const double A = de / (ds * e - s * de);
  const PotentialParams params(3, 2.0);
  QuadratureSpec spec;
  spec.outer_radius = 40.0;
  const PotentialEvaluator ev(params, spec);
  for (const Point& x : {Point{0.3, 0.2, 0.1}, Point{0.0, 0.0, 0.7}, Point{0.5, -0.5, 0.1}}) {
    const double r = x.norm();
    const double expected = 1.0 + A * std::sinh(r) / r;
    CHECK(ev.linear(F::indicator(R), x) == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("kernel mass through the linear potential") {
  for (auto [n, s] : {std::pair{1, 0.5}, {2, 1.3}, {3, 0.6}}) {
    const PotentialParams params(n, s);
    QuadratureSpec spec;
    spec.outer_radius = 50.0;
    Point x = Point::origin(n);
    x[0] = 0.2;
    CHECK(linear_bessel(F::constant(1.0), x, params, spec) == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("one-dimensional values match the substitution route") {
  const PotentialParams params(1, 0.5);
  const F bump = F::smooth_bump(0.25, 1.0);
  const F ind = F::indicator(0.5, Point{0.2});
  const F pl = F::power_log(0.25, 0.5);
  for (double x : {0.0, 0.1, 0.37, -0.6}) {
    const double a = bilinear_bessel(bump, ind, Point(x), params).value;
    CHECK(a == doctest::Approx(substitution_oracle(params, bump, ind, x, -3.0, 3.0)).epsilon(1e-7));
    if (x != 0.0) {
      const double b = bilinear_bessel(pl, bump, Point(x), params).value;
      CHECK(b == doctest::Approx(substitution_oracle(params, pl, bump, x, -3.0, 3.0)).epsilon(1e-5));
    }
  }
}

TEST_CASE("symmetry under exchanging f and g") {
  const PotentialParams params(2, 0.8);
  const F a = F::smooth_bump(0.1, 0.9);
  const F b = F::indicator(0.6, Point{0.3, -0.1});
  const Point x{0.2, 0.15};
  CHECK(bilinear_bessel(a, b, x, params).value ==
        doctest::Approx(bilinear_bessel(b, a, x, params).value).epsilon(1e-9));
}

TEST_CASE("translating both functions translates the potential") {
  const PotentialParams params(2, 0.8);
  const Point c{0.4, -0.3};
  const double centred =
      bilinear_bessel(F::indicator(1.0), F::smooth_bump(0.2, 0.7), Point{0.0, 0.0}, params).value;
  const double moved =
      bilinear_bessel(F::indicator(1.0, c), F::indicator(1.0, c), c, params).value;
  const double ref =
      bilinear_bessel(F::indicator(1.0), F::indicator(1.0), Point{0.0, 0.0}, params).value;
  CHECK(moved == doctest::Approx(ref).epsilon(1e-6));
  CHECK(centred > 0.0);
}

TEST_CASE("linear potential equals the bilinear one with g = 1") {
  const PotentialParams params(1, 0.5);
  const F f = F::smooth_bump(0.3, 0.8);
  for (double x : {0.0, 0.4, 1.5}) {
    const double lin = linear_bessel(f, Point(x), params);
    const double bil = bilinear_bessel(f, F::constant(1.0), Point(x), params).value;
    CHECK(lin == doctest::Approx(bil).epsilon(1e-12));
    const double z = substitution_oracle(params, f, F::constant(1.0), x, -1.0, 1.0);
    CHECK(lin == doctest::Approx(z).epsilon(1e-7));
  }
}

TEST_CASE("critical pair is flagged divergent, its control is not") {
  const PotentialParams params(1, 0.5);
  const F f = F::power_log(0.25, 0.5);
  const BilinearEvalResult r = bilinear_bessel(f, f, Point(0.0), params);
  CHECK(r.diverged);
  CHECK(r.cutoff_used == kKernelRadiusFloor);
  QuadratureSpec deeper;
  deeper.inner_cutoff = 1e-4;
  const BilinearEvalResult t = bilinear_bessel(f, f, Point(0.0), params, deeper);
  CHECK(t.diverged);
  CHECK(t.value < r.value);
  const F ctrl = F::indicator(1.0);
  const BilinearEvalResult c = bilinear_bessel(ctrl, ctrl, Point(0.0), params);
  CHECK_FALSE(c.diverged);
  CHECK(c.tail == TailVerdict::Converged);
}

TEST_CASE("truncated integrals increase as the cutoff shrinks") {
  const PotentialParams params(1, 0.5);
  const PotentialEvaluator ev(params);
  const F f = F::power_log(0.25, 0.5);
  const std::vector<double> cutoffs = geometric_sequence(0.125, 0.25, 10);
  const auto v = ev.truncated(f, f, Point(0.0), cutoffs);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);
  QuadratureSpec spec;
  spec.inner_cutoff = cutoffs[3];
  CHECK(v[3] == doctest::Approx(PotentialEvaluator(params, spec).bilinear(f, f, Point(0.0)).value)
                    .epsilon(1e-12));
}

TEST_CASE("dyadic weights and pieces") {
  const PotentialParams params(1, 0.5);
  CHECK(dyadic_weight(0, params) == 1.0);
  CHECK(dyadic_weight(4, params) == doctest::Approx(4.0));
  CHECK(dyadic_weight(-2, params) == doctest::Approx(std::exp(-1.0)));
  const F one = F::indicator(10.0);
  for (int k : {-2, 0, 3, 7}) {
    CHECK(dyadic_piece(k, one, one, Point(0.0), params) ==
          doctest::Approx(2.0 * std::ldexp(1.0, -k)).epsilon(1e-10));
  }
}

TEST_CASE("shell sums reconstruct and majorize the potential") {
  const PotentialParams params(1, 0.5);
  const PotentialEvaluator ev(params);
  const F f = F::smooth_bump(0.2, 0.6);
  const F g = F::smooth_bump(0.1, 0.9);
  for (double x : {0.0, 0.15}) {
    const double j = ev.bilinear(f, g, Point(x)).value;
    double mid = 0.0;
    double upper = 0.0;
    for (int k = -2; k <= 24; ++k) {
      const double shell = ev.dyadic_piece(k, f, g, Point(x)) - ev.dyadic_piece(k + 1, f, g, Point(x));
      mid += ev.kernel(std::ldexp(1.0, -k) / std::sqrt(2.0)) * shell;
      upper += ev.kernel(std::ldexp(1.0, -k - 1)) * shell;
    }
    CHECK(std::abs(mid - j) <= 0.1 * j);
    CHECK(upper >= j);
  }
}

TEST_CASE("outer radius too small is reported") {
  const PotentialParams params(1, 0.5);
  QuadratureSpec spec;
  spec.outer_radius = 2.0;
  CHECK_THROWS_AS(bilinear_bessel(F::constant(1.0), F::constant(1.0), Point(0.0), params, spec),
                  QuadratureError);
  CHECK_THROWS_AS(bilinear_riesz(F::constant(1.0), F::constant(1.0), Point(0.0), params, spec),
                  QuadratureError);
}

TEST_CASE("input validation") {
  const PotentialParams params(3, 1.0);
  CHECK_THROWS_AS(bilinear_bessel(F::indicator(1.0, Point{0.1, 0.0, 0.0}), F::indicator(1.0),
                                  Point{0.0, 0.0, 0.0}, params),
                  DomainError);
  CHECK_THROWS_AS(bilinear_bessel(F::indicator(1.0), F::indicator(1.0), Point(0.0), params),
                  DomainError);
  QuadratureSpec bad;
  bad.inner_cutoff = 1e-12;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("batch evaluation is ordered and thread-count independent") {
  const PotentialParams params(1, 0.5);
  std::vector<Point> pts;
  for (int i = 0; i < 9; ++i) pts.emplace_back(-0.8 + 0.2 * i);
  const F f = F::smooth_bump(0.2, 0.7);
  const auto a = bilinear_batch(f, f, pts, params, {}, 1);
  const auto b = bilinear_batch(f, f, pts, params, {}, 3);
  REQUIRE(a.size() == pts.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].value == bilinear_bessel(f, f, pts[i], params).value);
  }
  std::ostringstream csv;
  write_batch_csv(csv, 1, pts, a);
  CHECK(csv.str().rfind("x,value,diverged,cutoff_used\n", 0) == 0);
}
