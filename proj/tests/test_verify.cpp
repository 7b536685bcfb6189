#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "bipot/error.hpp"
#include "bipot/verify.hpp"

using namespace bipot;
using std::numbers::pi;
using boost::math::quadrature::gauss_kronrod;

namespace {

// G_s(r) from the heat-semigroup integral in log(delta), integrated with
// adaptive Gauss-Kronrod on the window where the integrand is not negligible.
double oracle_kernel(int n, double s, double r) {
  const double pre = 1.0 / (std::pow(4 * pi, s / 2) * std::tgamma(s / 2));
  auto f = [&](double v) {
    const double d = std::exp(v);
    return std::exp(-pi * r * r / d - d / (4 * pi) + v * (s - n) / 2);
  };
  const double lo = std::log(pi * r * r / 800), hi = std::log(4 * pi * 800);
  return pre * gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
}

// 2 int_eps^1 G(r) r^{-s} log(e/r)^{-(beta+gamma)} dr for n = 1.
double oracle_critical(double s, double eps, double total) {
  auto f = [&](double u) {
    const double r = std::exp(-u);
    return r * oracle_kernel(1, s, r) * std::pow(r, -s) * std::pow(1 + u, -total);
  };
  return 2 * gauss_kronrod<double, 61>::integrate(f, 0, std::log(1 / eps), 15, 1e-12);
}

// ||min(t^{-1/r1}, t^{-1/r2})||_{r_theta, alpha} by direct quadrature in log t.
double oracle_envelope(double r1, double r2, double theta, double alpha) {
  const double inv_rt = (1 - theta) / r1 + theta / r2;
  auto h = [&](double v) {
    const double t = std::exp(v);
    const double phi = std::min(std::pow(t, -1 / r1), std::pow(t, -1 / r2));
    return std::pow(std::pow(t, inv_rt) * phi, alpha);
  };
  const double I = gauss_kronrod<double, 61>::integrate(h, -200, 0, 10, 1e-13) +
                   gauss_kronrod<double, 61>::integrate(h, 0, 200, 10, 1e-13);
  return std::pow(I, 1 / alpha);
}

const PotentialParams kLine{1, 0.5};

const ReportCheck* find_check(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("oracles reproduce their frozen values") {
  CHECK(2 * gauss_kronrod<double, 61>::integrate(
                [](double r) { return oracle_kernel(1, 0.5, r); }, 0.5, 1, 10, 1e-13) ==
        doctest::Approx(0.13154459350588729).epsilon(1e-10));
  CHECK(oracle_critical(0.5, 1e-3, 1.0) == doctest::Approx(1.0031570970472508).epsilon(1e-10));
  CHECK(oracle_envelope(1, 3, 0.3, 1.5) == doctest::Approx(2.8304390251252993).epsilon(1e-10));
}

TEST_CASE("classify_exponents labels") {
  auto label = [](double ip, double iq, double ir) {
    return classify_exponents({ip, iq, ir}, kLine).label;
  };
  CHECK(label(1, 1, 1.5) == RegionLabel::WeakEndpoint);
  CHECK(label(0, 0, 0) == RegionLabel::InfinityTriangle);
  CHECK(label(0.5, 0, 0) == RegionLabel::CriticalLineFail);
  CHECK(label(0.25, 0.25, 0) == RegionLabel::CriticalLineFail);
  CHECK(label(0.5, 0.5, 1) == RegionLabel::StrongLebesgue);
  CHECK(label(1, 1, 2) == RegionLabel::StrongLebesgue);
  CHECK(label(0.5, 0.5, 0.5) == RegionLabel::FractionalSurfaceLorentz);
  CHECK(label(0.5, 0.5, 0.75) == RegionLabel::FractionalSurfaceLorentz);
  CHECK(label(1, 0.5, 1) == RegionLabel::WeakEndpoint);
  CHECK(label(0.5, 0.5, 0.4) == RegionLabel::OutsideStripFail);
  CHECK(label(0.5, 0.5, 1.1) == RegionLabel::OutsideStripFail);
  CHECK(label(0.1, 0.1, 0.1) == RegionLabel::InfinityTriangle);
  CHECK_FALSE(classify_exponents({1, 1, 1.5}, kLine).witnesses.empty());
  CHECK_THROWS_AS(classify_exponents({1.5, 0, 0}, kLine), DomainError);
}

TEST_CASE("strip violations are exactly the OutsideStripFail label") {
  const PotentialParams params{2, 1.2};
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j)
      for (int k = 0; k <= 20; ++k) {
        const double ip = i / 10.0, iq = j / 10.0, ir = k / 10.0;
        const bool outside = ir < ip + iq - 0.6 - 1e-9 || ir > ip + iq + 1e-9;
        CHECK((classify_exponents({ip, iq, ir}, params).label == RegionLabel::OutsideStripFail) ==
              outside);
      }
}

TEST_CASE("barycentric coordinates") {
  const auto th = compute_barycentric(2, 2, 4.0 / 3.0, kLine);
  CHECK(th[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(th[1] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(th[2] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(barycentric_residual(2, 2, 4.0 / 3.0, kLine, th) <= 1e-12);
  const auto sym = compute_barycentric(1.7, 1.7, 1.2, PotentialParams{3, 1});
  CHECK(sym[1] == sym[2]);
  CHECK(sym[0] + sym[1] + sym[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(compute_barycentric(1.1, 1.1, 2.0, kLine), DomainError);
}

TEST_CASE("crossover point and envelope constant") {
  CHECK(crossover_point(3, 3, 1, 2) == 1.0);
  const double t0 = crossover_point(1, 2, 1, 2);
  CHECK(t0 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::pow(t0, -1.0) == doctest::Approx(2 * std::pow(t0, -0.5)).epsilon(1e-14));
  CHECK(envelope_constant(1, 3, 0.3, 1.5) == doctest::Approx(2.8304390251252993).epsilon(1e-12));
  CHECK(envelope_constant(1, 2, 0.5, 2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(envelope_constant(1, 2, 0.5, INFINITY) == 1.0);
}

TEST_CASE("critical-line truncated values match the scalar oracle") {
  CriticalDivergenceArgs a;
  a.params = kLine;
  a.quadrature = default_experiment_quadrature(kLine);
  a.cutoffs = {0.125, 1e-3, 8e-6};
  for (double total : {0.8, 1.0, 1.2}) {
    a.beta = a.gamma = total / 2;
    const auto rep = run_critical_divergence(a);
    REQUIRE(rep.measured.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(rep.measured[k] ==
            doctest::Approx(oracle_critical(0.5, a.cutoffs[k], total)).epsilon(1e-5));
  }
}

TEST_CASE("critical divergence verdicts on both sides of beta+gamma = 1") {
  auto plan = [](const char* total) {
    const std::string half = std::to_string(std::stod(total) / 2);
    return make_experiment_plan("critical_divergence", kLine, std::nullopt,
                                {{"beta", half}, {"gamma", half}});
  };
  const auto div = plan("1.0").run();
  CHECK(div.verdict);
  CHECK(find_check(div, "detector_diverged")->passed);
  const auto conv = plan("1.2").run();
  CHECK(conv.verdict);
  CHECK(conv.fit_rule == FitRule::None);
  CHECK(find_check(conv, "detector_converged")->passed);
}

TEST_CASE("scaling_upper bound and its c0") {
  const auto rep = make_experiment_plan("scaling_upper", kLine, std::nullopt, {}).run();
  bool found = false;
  for (const auto& note : rep.notes) found = found || note.find("c0 = 0.131544593") == 0;
  CHECK(found);
  CHECK(rep.fit_slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.verdict);
}

TEST_CASE("indicator pair potential matches the kernel tail oracle") {
  // f = g = 1_{(-4, 4)}: J(x) = int_{|y| < 4 - |x|} G.
  const PotentialEvaluator ev(kLine);
  const auto ind = AnalyticFunction::indicator(4.0);
  const double v = ev.bilinear(ind, ind, Point(1.5)).value;
  CHECK(v == doctest::Approx(0.98489898261860676).epsilon(1e-6));
}

TEST_CASE("O'Neil ratio for the indicator pair") {
  const auto rep = make_experiment_plan("oneil_check", kLine, std::nullopt, {}).run();
  REQUIRE(rep.measured.size() == 6);
  // ||1 * 1||_{2,2} / (||1||_{4/3,4/3}^2) with the tent 2 - |x| on (-2, 2).
  CHECK(rep.measured[0] == doctest::Approx(std::sqrt(16.0 / 3.0) / std::pow(2.0, 1.5)).epsilon(1e-4));
  CHECK(rep.measured[5] == 0.0);
  for (double m : rep.measured) CHECK(m <= 3 * 2.0 + 1e-12);
}

TEST_CASE("interpolation crossover defaults") {
  const auto rep = make_experiment_plan("interpolation_crossover", kLine, std::nullopt, {}).run();
  CHECK(rep.verdict);
  CHECK(find_check(rep, "max_rearrangement_over_envelope")->value <= 1.0);
  CHECK(rep.measured.size() == 100);
}

TEST_CASE("barycentric experiment reconstructs every draw") {
  const auto rep = make_experiment_plan("barycentric", kLine, std::nullopt, {}).run();
  CHECK(rep.verdict);
  for (double m : rep.measured) CHECK(m <= 1e-12);
}

TEST_CASE("verdict follows the fit rule and gating checks only") {
  ExperimentReport r;
  r.experiment_id = "x";
  r.fit_rule = FitRule::SlopeMatch;
  r.expected_slope = 1.0;
  r.tolerance = 0.05;
  r.fit({0, 1, 2, 3}, {0, 1.01, 2.02, 3.03});
  r.add_check("diagnostic", 5, "<=", 1, false);
  r.finalize();
  CHECK(r.verdict);
  r.add_check("gate", 5, "<=", 1);
  r.finalize();
  CHECK_FALSE(r.verdict);

  ExperimentReport p;
  p.fit_rule = FitRule::PositiveSlope;
  p.fit({0, 1, 2}, {0, -1, -2});
  p.finalize();
  CHECK_FALSE(p.verdict);
}

TEST_CASE("report serialization is deterministic and writes non-finite numbers as null") {
  ExperimentReport r;
  r.experiment_id = "demo";
  r.config = {{"n", "1"}};
  r.parameter_name = "t";
  r.parameter_sequence = {1, 2};
  r.measured_name = "m";
  r.measured = {0.1, NAN};
  r.add_check("c", INFINITY, "<", 1.0);
  r.finalize();
  const std::string a = report_to_json(r);
  CHECK(a == report_to_json(r));
  const auto j = nlohmann::json::parse(a);
  CHECK(j["measured"][1].is_null());
  CHECK(j["checks"][0]["value"].is_null());
  CHECK(j["fit_slope"].is_null());
  CHECK(j["expected_slope"].is_null());
  CHECK(j["verdict"] == "fail");
  CHECK(nlohmann::ordered_json::parse(a).begin().key() == "experiment_id");
  const auto csv = reports_to_csv({r});
  CHECK(csv.rfind("experiment_id,index,parameter_name,parameter,measured_name,measured,", 0) == 0);
  CHECK(csv.find("demo,1,t,2,m,") != std::string::npos);
}

TEST_CASE("make_experiment_plan validates before computing") {
  CHECK_THROWS_AS(make_experiment_plan("nope", kLine, std::nullopt, {}), DomainError);
  CHECK_THROWS_AS(make_experiment_plan("barycentric", kLine, std::nullopt, {{"foo", "1"}}),
                  DomainError);
  CHECK_THROWS_AS(
      make_experiment_plan("barycentric", kLine, std::nullopt, {{"p", "2"}, {"p", "3"}}),
      ParseError);
  CHECK_THROWS_AS(make_experiment_plan("barycentric", kLine, std::nullopt, {{"p", "two"}}),
                  ParseError);
  CHECK_THROWS_AS(
      make_experiment_plan("scaling_lower", kLine, std::nullopt, {{"lambdas", "1,2,3,8"}}),
      DomainError);
  CHECK_THROWS_AS(
      make_experiment_plan("critical_divergence", kLine, std::nullopt, {{"p", "3"}}),
      DomainError);
  CHECK_THROWS_AS(make_experiment_plan("barycentric", PotentialParams{1, 1.5}, std::nullopt, {}),
                  DomainError);
  const auto keys = experiment_keys("mollifier_blowup");
  CHECK(std::find(keys.begin(), keys.end(), "epsilons") != keys.end());
}
