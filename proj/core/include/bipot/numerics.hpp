#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bipot {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Supported sizes: 4, 8, 12, 16, 20, 32, 48, 64.
const GaussRule& gauss_rule(int points);

template <class F>
double integrate_gauss(F&& f, double a, double b, const GaussRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

bool is_geometric(std::span<const double> values, double rel_tol = 1e-9);
std::vector<double> geometric_sequence(double first, double ratio, int count);
std::vector<double> log_spaced(double lo, double hi, int count);

enum class TailVerdict { Converged, Diverged, Inconclusive };

const char* to_string(TailVerdict v);

struct TailAnalysis {
  TailVerdict verdict = TailVerdict::Inconclusive;
  // Last increment ratio, normalised to one halving of the cutoff.
  double last_ratio = 0.0;
  // Exponent c in increments ~ L^{-c} dL with L = log(e / eps); NaN if unused.
  double rate_exponent = 0.0;
  bool rate_exponent_used = false;
  // Extrapolated limit when converged, else the last partial value.
  double limit = 0.0;
};

// Classifies the behaviour of partial integrals V_k = int_{eps_k} as the
// cutoffs eps_k decrease.  Cutoffs must be strictly decreasing and positive.
TailAnalysis classify_tail(std::span<const double> cutoffs,
                           std::span<const double> partial_values);

// Shortest round-trip decimal form; "inf" and "-inf" for infinities.
std::string format_number(double v);
// Parses a full decimal token (also "inf", "-inf"); throws ParseError.
double parse_number(std::string_view text);

}  // namespace bipot
