#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"

#include "bipot/error.hpp"
#include "bipot/kernel.hpp"
#include "bipot/lorentz.hpp"
#include "bipot/numerics.hpp"

using namespace bipot;
using F = AnalyticFunction;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridFunction line_grid(std::vector<double> values, double h = 0.01) {
  const std::size_t n = values.size();
  return GridFunction(1, Point(0.0), {h, 1.0, 1.0}, {n, 1, 1}, std::move(values));
}

// Rearrangement route for a monotone radial profile, written independently
// of the library: int_a^b m(r)^{alpha/p - 1} phi(r)^alpha m'(r) dr with
// m(r) = v_n (r^n - a^n), graded in log(r - a) toward the endpoint singularity.
double radial_oracle(const std::function<double(double)>& phi, int n, double p, double alpha,
                     double a, double b) {
  const double vn = unit_ball_volume(n);
  const double e = alpha / p;
  const GaussRule& rule = gauss_rule(32);
  auto m = [&](double r) { return vn * (std::pow(r, n) - std::pow(a, n)); };
  const double delta = 1e-13 * a;
  double total = std::pow(m(a + delta), e) * std::pow(phi(a), alpha) / e;
  const int panels = 600;
  const double ua = std::log(delta);
  const double ub = std::log(b - a);
  for (int i = 0; i < panels; ++i) {
    const double u0 = ua + (ub - ua) * i / panels;
    const double u1 = ua + (ub - ua) * (i + 1) / panels;
    total += integrate_gauss(
        [&](double u) {
          const double r = a + std::exp(u);
          const double dm = vn * n * std::pow(r, n - 1) * std::exp(u);
          return std::pow(m(r), e - 1.0) * std::pow(phi(r), alpha) * dm;
        },
        u0, u1, rule);
  }
  return std::pow(total, 1.0 / alpha);
}

}  // namespace

TEST_CASE("indicator norms have the closed form (p/alpha)^{1/alpha} m^{1/p}") {
  std::vector<double> v(1000, 0.0);
  std::fill(v.begin() + 100, v.begin() + 400, 1.0);
  const GridFunction g = line_grid(v);  // measure 3
  for (double p : {0.5, 1.0, 2.0, 3.5}) {
    for (double alpha : {0.5, 1.0, 2.0, 7.0}) {
      const double expected = std::pow(p / alpha, 1.0 / alpha) * std::pow(3.0, 1.0 / p);
      const LorentzNormPair both = lorentz_norm_both(g, {p, alpha});
      CHECK(both.rearrangement == doctest::Approx(expected).epsilon(1e-12));
      CHECK(both.distribution == doctest::Approx(expected).epsilon(1e-2));
    }
    CHECK(weak_norm(g, p) == doctest::Approx(std::pow(3.0, 1.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("weak norm of the critical power is v_1^{1/p} away from the sampled singularity") {
  // |x|^{-1/p} on 0.01 < |x| < 1: t^{1/p} f*(t) = (t / (t + 0.02))^{1/p} 2^{1/p} -> 2^{1/p}.
  const double p = 2.5;
  const std::size_t cells = 200000;
  std::vector<double> v(cells);
  const double h = 2.0 / cells;
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = std::abs(-1.0 + (i + 0.5) * h);
    v[i] = x > 0.01 ? std::pow(x, -1.0 / p) : 0.0;
  }
  const double expected = std::pow(2.0, 1.0 / p) * std::pow(1.98 / 2.0, 1.0 / p);
  CHECK(weak_norm(line_grid(v, h), p) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("tent function in L^{p,alpha}") {
  // f = 1 - |x| on (-1, 1): f*(t) = 1 - t/2, ||f||^alpha = 2^{alpha/p} B(alpha/p, alpha + 1).
  const std::size_t cells = 20000;
  std::vector<double> v(cells);
  const double h = 2.0 / cells;
  for (std::size_t i = 0; i < cells; ++i) v[i] = 1.0 - std::abs(-1.0 + (i + 0.5) * h);
  const GridFunction g = line_grid(v, h);
  for (double p : {0.7, 2.0, 5.0}) {
    for (double alpha : {0.5, 1.0, 2.0, 4.0}) {
      const double expected =
          std::pow(std::pow(2.0, alpha / p) * std::beta(alpha / p, alpha + 1.0), 1.0 / alpha);
      CHECK(lorentz_norm(g, {p, alpha}) == doctest::Approx(expected).epsilon(1e-3));
    }
  }
}

TEST_CASE("routes agree and respect monotonicity in alpha") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(3000);
    for (auto& x : v) x = u(rng) < 0.3 ? 0.0 : std::pow(u(rng), -0.4) * (u(rng) < 0.5 ? -1 : 1);
    const GridFunction g = line_grid(v, 1e-3);
    const double p = 0.8 + 3.0 * u(rng);
    for (double alpha : {0.7, 1.3, 2.9, kInf}) {
      const LorentzNormPair both = lorentz_norm_both(g, {p, alpha});
      CHECK(both.distribution == doctest::Approx(both.rearrangement).epsilon(1e-2));
    }
    // ||f||_{p,r} <= (q/p)^{1/q - 1/r} ||f||_{p,q} for q < r.
    const double q = 1.1;
    const double r = 3.0;
    const double lhs = lorentz_norm(g, {p, r});
    const double rhs = std::pow(q / p, 1.0 / q - 1.0 / r) * lorentz_norm(g, {p, q});
    CHECK(lhs <= rhs * (1.0 + 1e-12));
    CHECK(weak_norm(g, p) <= std::pow(q / p, 1.0 / q) * lorentz_norm(g, {p, q}) * (1 + 1e-12));
  }
}

TEST_CASE("norms are rearrangement invariant") {
  std::vector<double> v(500);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i)) * i;
  std::vector<double> w = v;
  std::reverse(w.begin(), w.end());
  std::rotate(w.begin(), w.begin() + 123, w.end());
  for (auto& x : w) x = -x;
  CHECK(lorentz_norm(line_grid(v), {1.5, 2.0}) == lorentz_norm(line_grid(w), {1.5, 2.0}));
}

TEST_CASE("distribution function and rearrangement") {
  const GridFunction g = line_grid({0.0, 3.0, -1.0, 3.0, 2.0}, 0.5);
  const DistributionFunction d = distribution_function(g);
  CHECK(d(0.0) == doctest::Approx(2.0));
  CHECK(d(1.0) == doctest::Approx(1.5));
  CHECK(d(2.5) == doctest::Approx(1.0));
  CHECK(d(3.0) == 0.0);
  CHECK(d.min_positive() == 1.0);
  const DecreasingRearrangement fs = decreasing_rearrangement(g);
  CHECK(fs(0.0) == 3.0);
  CHECK(fs(0.99) == 3.0);
  CHECK(fs(1.0) == 2.0);
  CHECK(fs(1.7) == 1.0);
  CHECK(fs(2.0) == 0.0);
  // Equimeasurability: |{f* > lambda}| = d(lambda).
  for (double lambda : {0.0, 0.5, 1.0, 1.5, 2.0, 2.9}) {
    double m = 0.0;
    for (double t = 0.0005; t < 3.0; t += 0.001) m += fs(t) > lambda ? 0.001 : 0.0;
    CHECK(m == doctest::Approx(d(lambda)).epsilon(1e-3));
  }
}

TEST_CASE("csv and binary dumps round trip") {
  const GridFunction g = GridFunction::sample(F::smooth_bump(0.3, 0.9), 2, 1.0, 40);
  std::stringstream csv;
  g.write_csv(csv);
  const GridFunction a = GridFunction::read_csv(csv);
  CHECK(a.samples() == g.samples());
  CHECK(a.cell_measure() == g.cell_measure());
  std::stringstream bin;
  g.write_binary(bin);
  const GridFunction b = GridFunction::read_binary(bin);
  CHECK(b.samples() == g.samples());
  CHECK(b.extents() == g.extents());
  std::stringstream bad("dim,2\norigin,0\n");
  CHECK_THROWS_AS(GridFunction::read_csv(bad), ParseError);
  std::stringstream junk("NOTAGRID");
  CHECK_THROWS_AS(GridFunction::read_binary(junk), ParseError);
}

TEST_CASE("truncated radial norms match the rearrangement oracle") {
  struct Case {
    F f;
    int n;
    double p;
    double alpha;
    double a;
  };
  const std::vector<Case> cases{
      {F::power_log(0.5, 0.5), 1, 2.0, 2.0, 1e-6},
      {F::power_log(0.5, 0.25), 1, 2.0, 1.5, 1e-9},
      {F::power_log(1.0, 0.5), 2, 2.0, 4.0, 1e-5},
      {F::power_log(2.0, 1.0, 0.125), 3, 1.5, 1.2, 1e-4},
      {F::smooth_bump(0.2, 0.8), 2, 3.0, 0.8, 0.01},
  };
  for (const Case& c : cases) {
    const double lib = lorentz_norm_truncated(c.f, c.n, {c.p, c.alpha}, c.a);
    const double oracle = radial_oracle([&](double r) { return c.f.radial(r, c.n); }, c.n, c.p,
                                        c.alpha, c.a, c.f.support_radius());
    CHECK(lib == doctest::Approx(oracle).epsilon(1e-6));
  }
  // Weak quasinorm of |x|^{-n/p} on the annulus approaches v_n^{1/p}.
  const double w = lorentz_norm_truncated(F::power_log(1.5, 0.0), 3, {2.0, kInf}, 1e-6);
  CHECK(w == doctest::Approx(std::pow(unit_ball_volume(3), 0.5)).epsilon(1e-6));
}

TEST_CASE("truncated norm rejects non-monotone profiles") {
  CHECK_THROWS_AS(lorentz_norm_truncated(F::power_log(0.1, 2.0), 1, {2.0, 2.0}, 1e-8),
                  DomainError);
  CHECK_THROWS_AS(lorentz_norm_truncated(F::indicator(1.0, Point{0.5}), 1, {2.0, 2.0}, 1e-3),
                  DomainError);
  CHECK_THROWS_AS(LorentzIndex({-1.0, 1.0}).validate(), DomainError);
}
