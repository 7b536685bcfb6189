#include "bipot/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include "bipot/error.hpp"

namespace bipot {
namespace {

template <unsigned N>
GaussRule expand_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  GaussRule rule;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w[i]);
      continue;
    }
    rule.nodes.push_back(-x[i]);
    rule.weights.push_back(w[i]);
    rule.nodes.push_back(x[i]);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

constexpr double kRatioThreshold = 0.9;
constexpr double kPowerDivergence = 1.05;
constexpr double kLogDivergent = 1.05;
constexpr double kLogConvergent = 1.15;
constexpr int kWindow = 5;

}  // namespace

const GaussRule& gauss_rule(int points) {
  static const GaussRule r4 = expand_rule<4>();
  static const GaussRule r8 = expand_rule<8>();
  static const GaussRule r12 = expand_rule<12>();
  static const GaussRule r16 = expand_rule<16>();
  static const GaussRule r20 = expand_rule<20>();
  static const GaussRule r32 = expand_rule<32>();
  static const GaussRule r48 = expand_rule<48>();
  static const GaussRule r64 = expand_rule<64>();
  switch (points) {
    case 4: return r4;
    case 8: return r8;
    case 12: return r12;
    case 16: return r16;
    case 20: return r20;
    case 32: return r32;
    case 48: return r48;
    case 64: return r64;
    default:
      throw DomainError("unsupported Gauss-Legendre size " + std::to_string(points));
  }
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("line fit needs at least two paired samples");
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*hi - *lo <= 0.0) {
    throw DomainError("line fit needs distinct abscissae");
  }
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  LinearFit fit;
  if (x.size() == 2) {
    fit.slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    fit.intercept = ys[0] - fit.slope * xs[0];
    fit.r_squared = 1.0;
    return fit;
  }
  const auto [c0, c1, r2] =
      boost::math::statistics::simple_ordinary_least_squares_with_R_squared(xs, ys);
  fit.intercept = c0;
  fit.slope = c1;
  // Boost reports NaN when y has zero variance; a constant sequence is fit exactly.
  fit.r_squared = std::isnan(r2) ? 1.0 : r2;
  return fit;
}

bool is_geometric(std::span<const double> values, double rel_tol) {
  if (values.size() < 2) return true;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  const double ratio = values[1] / values[0];
  if (std::abs(ratio - 1.0) < 1e-15) return false;
  for (std::size_t i = 2; i < values.size(); ++i) {
    const double r = values[i] / values[i - 1];
    if (std::abs(r - ratio) > rel_tol * std::abs(ratio)) return false;
  }
  return true;
}

std::vector<double> geometric_sequence(double first, double ratio, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(first * std::pow(ratio, i));
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw DomainError("log_spaced needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

const char* to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::Converged: return "converged";
    case TailVerdict::Diverged: return "diverged";
    case TailVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TailAnalysis classify_tail(std::span<const double> cutoffs,
                           std::span<const double> partial_values) {
  if (cutoffs.size() != partial_values.size()) {
    throw DomainError("cutoffs and partial values differ in length");
  }
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > 0.0)) throw DomainError("cutoffs must be positive");
    if (i > 0 && !(cutoffs[i] < cutoffs[i - 1])) {
      throw DomainError("cutoffs must be strictly decreasing");
    }
  }
  TailAnalysis out;
  out.limit = partial_values.empty() ? 0.0 : partial_values.back();
  out.rate_exponent = std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = cutoffs.size();
  if (m < 4) return out;

  std::vector<double> delta(m - 1);
  std::vector<double> halvings(m - 1);
  for (std::size_t k = 1; k < m; ++k) {
    delta[k - 1] = std::abs(partial_values[k] - partial_values[k - 1]);
    halvings[k - 1] = std::log2(cutoffs[k - 1] / cutoffs[k]);
  }
  const double scale = std::max(std::abs(partial_values.back()),
                                std::numeric_limits<double>::min());
  auto negligible = [&](double d) { return d <= 1e-15 * scale; };

  // Per-halving ratio of successive increments.
  auto ratio_at = [&](std::size_t k) {
    if (negligible(delta[k]) && negligible(delta[k - 1])) return 0.0;
    if (negligible(delta[k - 1])) return std::numeric_limits<double>::infinity();
    const double raw = delta[k] / delta[k - 1];
    return std::pow(raw, 1.0 / halvings[k]);
  };
  const std::size_t last = delta.size() - 1;
  const double r_last = ratio_at(last);
  const double r_prev = ratio_at(last - 1);
  out.last_ratio = r_last;

  if (std::max(r_last, r_prev) < kRatioThreshold) {
    out.verdict = TailVerdict::Converged;
    if (!negligible(delta[last]) && !negligible(delta[last - 1])) {
      const double raw = delta[last] / delta[last - 1];
      const double sign = partial_values[m - 1] >= partial_values[m - 2] ? 1.0 : -1.0;
      out.limit += sign * delta[last] * raw / (1.0 - raw);
    }
    return out;
  }
  if (std::min(r_last, r_prev) > kPowerDivergence) {
    out.verdict = TailVerdict::Diverged;
    return out;
  }

  // Slowly varying increments: fit increments per unit L against L.
  const std::size_t window = std::min<std::size_t>(kWindow, delta.size());
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = delta.size() - window; k < delta.size(); ++k) {
    const double l0 = std::log(std::exp(1.0) / cutoffs[k]);
    const double l1 = std::log(std::exp(1.0) / cutoffs[k + 1]);
    if (negligible(delta[k])) continue;
    lx.push_back(std::log(std::sqrt(l0 * l1)));
    ly.push_back(std::log(delta[k] / (l1 - l0)));
  }
  if (lx.size() < 3) return out;
  const LinearFit fit = fit_line(lx, ly);
  const double c = -fit.slope;
  out.rate_exponent = c;
  out.rate_exponent_used = true;
  if (c <= kLogDivergent) {
    out.verdict = TailVerdict::Diverged;
  } else if (c >= kLogConvergent) {
    out.verdict = TailVerdict::Converged;
    const double l_end = std::log(std::exp(1.0) / cutoffs.back());
    const double amp = std::exp(fit.intercept);
    const double sign = partial_values[m - 1] >= partial_values[m - 2] ? 1.0 : -1.0;
    out.limit += sign * amp * std::pow(l_end, 1.0 - c) / (c - 1.0);
  }
  return out;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  if (text == "inf" || text == "+inf" || text == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  if (text == "-inf" || text == "-infinity") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace bipot
