#include <cmath>

#include "doctest.h"

#include "bipot/error.hpp"
#include "bipot/numerics.hpp"

using namespace bipot;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const GaussRule& r = gauss_rule(8);
  CHECK(r.nodes.size() == 8);
  const double v = integrate_gauss([](double x) { return std::pow(x, 15) + 3 * x * x; }, 0.0, 2.0, r);
  CHECK(v == doctest::Approx(65536.0 / 16.0 + 8.0).epsilon(1e-13));
  CHECK_THROWS_AS(gauss_rule(7), DomainError);
}

TEST_CASE("line fit") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const std::vector<double> flat{2, 2, 2, 2};
  CHECK(fit_line(x, flat).r_squared == 1.0);
  CHECK_THROWS_AS(fit_line(flat, y), DomainError);
}

TEST_CASE("sequences") {
  CHECK(is_geometric(geometric_sequence(1.0, 2.0, 5)));
  CHECK_FALSE(is_geometric(std::vector<double>{1, 2, 3}));
  CHECK_FALSE(is_geometric(std::vector<double>{1, -2, 4}));
  const auto g = log_spaced(1e-3, 1.0, 4);
  CHECK(g[1] == doctest::Approx(1e-2));
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) {
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(std::isinf(parse_number(" inf ")));
  CHECK(parse_number("+2") == 2.0);
  CHECK_THROWS_AS(parse_number("1.5x"), ParseError);
  CHECK_THROWS_AS(parse_number(""), ParseError);
}

namespace {

std::pair<std::vector<double>, std::vector<double>> sequence(double (*antiderivative)(double),
                                                             int levels) {
  std::vector<double> eps;
  std::vector<double> vals;
  for (int k = 0; k < levels; ++k) {
    const double e = std::ldexp(1.0, -k - 1);
    eps.push_back(e);
    vals.push_back(antiderivative(std::log(std::exp(1.0) / e)));
  }
  return {eps, vals};
}

}  // namespace

TEST_CASE("tail classifier") {
  // Geometric convergence: V = 1 - eps.
  {
    std::vector<double> eps;
    std::vector<double> vals;
    for (int k = 0; k < 20; ++k) {
      eps.push_back(std::ldexp(1.0, -k));
      vals.push_back(1.0 - eps.back());
    }
    const TailAnalysis t = classify_tail(eps, vals);
    CHECK(t.verdict == TailVerdict::Converged);
    CHECK(t.limit == doctest::Approx(1.0).epsilon(1e-12));
  }
  // log L growth (integrand L^{-1}) diverges.
  {
    auto [e, v] = sequence([](double l) { return std::log(l); }, 30);
    CHECK(classify_tail(e, v).verdict == TailVerdict::Diverged);
  }
  // L^{0.2} growth diverges.
  {
    auto [e, v] = sequence([](double l) { return std::pow(l, 0.2); }, 30);
    CHECK(classify_tail(e, v).verdict == TailVerdict::Diverged);
  }
  // Integrand L^{-2}: converges to 1 from 1 - 1/L.
  {
    auto [e, v] = sequence([](double l) { return 1.0 - 1.0 / l; }, 30);
    const TailAnalysis t = classify_tail(e, v);
    CHECK(t.verdict == TailVerdict::Converged);
    CHECK(t.rate_exponent == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(t.limit == doctest::Approx(1.0).epsilon(1e-3));
  }
  // Power divergence eps^{-1/2}.
  {
    std::vector<double> eps;
    std::vector<double> vals;
    for (int k = 0; k < 12; ++k) {
      eps.push_back(std::ldexp(1.0, -k));
      vals.push_back(std::pow(eps.back(), -0.5));
    }
    CHECK(classify_tail(eps, vals).verdict == TailVerdict::Diverged);
  }
  CHECK_THROWS_AS(classify_tail(std::vector<double>{1, 2}, std::vector<double>{0, 0}),
                  DomainError);
}
