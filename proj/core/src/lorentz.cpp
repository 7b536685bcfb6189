#include "bipot/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "bipot/error.hpp"
#include "bipot/kernel.hpp"
#include "bipot/numerics.hpp"

namespace bipot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMethodTolerance = 0.05;
constexpr int kMinLambdaNodes = 512;
constexpr double kLambdaRatio = 1.002;
constexpr int kMaxLambdaNodes = 400000;
constexpr char kBinaryMagic[8] = {'B', 'I', 'P', 'O', 'T', 'G', 'R', 'D'};
constexpr std::uint32_t kBinaryVersion = 1;

std::vector<double> sorted_nonzero(const GridFunction& f) {
  std::vector<double> v;
  v.reserve(f.size());
  for (double x : f.samples()) {
    if (!std::isfinite(x)) throw DomainError("grid samples must be finite");
    if (x != 0.0) v.push_back(std::abs(x));
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

// (p/alpha) [t1^{alpha/p} - t0^{alpha/p}] with t1 = (k+1) c, t0 = k c.
double step_weight(std::size_t k, double c, double e) {
  if (k == 0) return std::pow(c, e) / e;
  const double kk = static_cast<double>(k);
  return std::pow(kk * c, e) * std::expm1(e * std::log1p(1.0 / kk)) / e;
}

double norm_by_rearrangement(const std::vector<double>& sorted, double cell,
                             const LorentzIndex& idx) {
  if (sorted.empty()) return 0.0;
  const double p = idx.p;
  if (std::isinf(idx.alpha)) {
    double best = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      best = std::max(best, sorted[k] * std::pow((k + 1) * cell, 1.0 / p));
    }
    return best;
  }
  const double a = idx.alpha;
  const double e = a / p;
  // Sum relative to the largest term to avoid overflow of v^alpha.
  const double vmax = sorted.front();
  double sum = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    sum += std::pow(sorted[k] / vmax, a) * step_weight(k, cell, e);
  }
  return vmax * std::pow(sum, 1.0 / a);
}

double norm_by_distribution(const std::vector<double>& sorted, double cell,
                            const LorentzIndex& idx) {
  if (sorted.empty()) return 0.0;
  const double p = idx.p;
  const double vmax = sorted.front();
  const double vmin = sorted.back();
  const double lam_lo = 0.5 * vmin;
  const double lam_hi = 2.0 * vmax;
  const double span = std::log(lam_hi / lam_lo);
  const int nodes = std::clamp(static_cast<int>(std::ceil(span / std::log(kLambdaRatio))) + 1,
                               kMinLambdaNodes, kMaxLambdaNodes);
  const double dw = span / (nodes - 1);
  // sorted is decreasing; d(lambda) = cell * #{v > lambda}.
  auto d = [&](double lambda) {
    // First element <= lambda; everything before it exceeds lambda.
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), lambda, std::greater<>());
    return cell * static_cast<double>(it - sorted.begin());
  };
  const double total = cell * static_cast<double>(sorted.size());
  if (std::isinf(idx.alpha)) {
    double best = lam_lo * std::pow(total, 1.0 / p);
    for (int j = 0; j < nodes; ++j) {
      const double lambda = lam_lo * std::exp(dw * j);
      best = std::max(best, lambda * std::pow(d(lambda), 1.0 / p));
    }
    return best;
  }
  const double a = idx.alpha;
  // p int_0^inf lambda^alpha d^{alpha/p} dlambda/lambda, scaled by vmax.
  double sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double lambda = lam_lo * std::exp(dw * j);
    const double w = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
    sum += w * std::pow(lambda / vmax, a) * std::pow(d(lambda), a / p);
  }
  sum *= dw;
  sum += std::pow(total, a / p) * std::pow(lam_lo / vmax, a) / a;
  return vmax * std::pow(p * sum, 1.0 / a);
}

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string("grid csv: missing ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ParseError("grid binary: truncated input");
  }
  return v;
}

}  // namespace

void LorentzIndex::validate() const {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("Lorentz p must be in (0, inf)");
  if (!(alpha > 0.0) || std::isnan(alpha)) throw DomainError("Lorentz alpha must be in (0, inf]");
}

GridFunction::GridFunction(int dim, Point origin, std::array<double, 3> spacing,
                           std::array<std::size_t, 3> extents, std::vector<double> samples)
    : dim_(dim), origin_(origin), spacing_(spacing), extents_(extents), samples_(std::move(samples)) {
  if (dim_ < 1 || dim_ > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  origin_.dim = dim_;
  std::size_t count = 1;
  for (int i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (i >= dim_) {
      extents_[ui] = 1;
      spacing_[ui] = 1.0;
      origin_.x[ui] = 0.0;
      continue;
    }
    if (extents_[ui] == 0) throw DomainError("grid extents must be positive");
    if (!(spacing_[ui] > 0.0) || !std::isfinite(spacing_[ui])) {
      throw DomainError("grid spacing must be positive");
    }
    count *= extents_[ui];
  }
  if (count != samples_.size()) throw DomainError("grid sample count does not match extents");
}

GridFunction GridFunction::sample(const AnalyticFunction& f, int n, double half_width,
                                  std::size_t cells_per_axis) {
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(half_width > 0.0) || cells_per_axis < 2) throw DomainError("invalid sampling box");
  const double h = 2.0 * half_width / static_cast<double>(cells_per_axis);
  const double supp = f.support_radius();
  if (supp > 0.0 && supp < 2.0 * h) {
    throw DomainError("grid too coarse to resolve the function support");
  }
  Point origin = Point::origin(n);
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> extents{1, 1, 1};
  for (int i = 0; i < n; ++i) {
    origin[i] = -half_width;
    spacing[static_cast<std::size_t>(i)] = h;
    extents[static_cast<std::size_t>(i)] = cells_per_axis;
  }
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= cells_per_axis;
  std::vector<double> values(total);
  GridFunction grid(n, origin, spacing, extents, std::vector<double>(total, 0.0));
  for (std::size_t k = 0; k < total; ++k) values[k] = f(grid.cell_center(k));
  grid.samples_ = std::move(values);
  return grid;
}

double GridFunction::cell_measure() const {
  double m = 1.0;
  for (int i = 0; i < dim_; ++i) m *= spacing_[static_cast<std::size_t>(i)];
  return m;
}

Point GridFunction::cell_center(std::size_t flat) const {
  Point p = Point::origin(dim_);
  for (int i = 0; i < dim_; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const std::size_t idx = flat % extents_[ui];
    flat /= extents_[ui];
    p[i] = origin_.x[ui] + (static_cast<double>(idx) + 0.5) * spacing_[ui];
  }
  return p;
}

void GridFunction::write_csv(std::ostream& out) const {
  out << "dim," << dim_ << "\n";
  out << "origin";
  for (int i = 0; i < dim_; ++i) out << ',' << format_number(origin_[i]);
  out << "\nspacing";
  for (int i = 0; i < dim_; ++i) out << ',' << format_number(spacing_[static_cast<std::size_t>(i)]);
  out << "\nextents";
  for (int i = 0; i < dim_; ++i) out << ',' << extents_[static_cast<std::size_t>(i)];
  out << "\nvalue\n";
  for (double v : samples_) out << format_number(v) << "\n";
}

GridFunction GridFunction::read_csv(std::istream& in) {
  auto field = [&](const char* key) {
    auto cells = split_csv(read_line(in, key));
    if (cells.empty() || cells[0] != key) throw ParseError(std::string("grid csv: expected ") + key);
    cells.erase(cells.begin());
    return cells;
  };
  const auto dim_cells = field("dim");
  if (dim_cells.size() != 1) throw ParseError("grid csv: bad dim line");
  const int dim = static_cast<int>(parse_number(dim_cells[0]));
  if (dim < 1 || dim > 3) throw ParseError("grid csv: dimension must be 1, 2 or 3");
  const auto o = field("origin");
  const auto s = field("spacing");
  const auto e = field("extents");
  const auto ud = static_cast<std::size_t>(dim);
  if (o.size() != ud || s.size() != ud || e.size() != ud) {
    throw ParseError("grid csv: header arity does not match dimension");
  }
  Point origin = Point::origin(dim);
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> extents{1, 1, 1};
  std::size_t total = 1;
  for (std::size_t i = 0; i < ud; ++i) {
    origin.x[i] = parse_number(o[i]);
    spacing[i] = parse_number(s[i]);
    const double ext = parse_number(e[i]);
    if (!(ext >= 1.0) || ext != std::floor(ext)) throw ParseError("grid csv: bad extent");
    extents[i] = static_cast<std::size_t>(ext);
    total *= extents[i];
  }
  if (read_line(in, "value header") != "value") throw ParseError("grid csv: expected value");
  std::vector<double> values;
  values.reserve(total);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    values.push_back(parse_number(line));
  }
  if (values.size() != total) throw ParseError("grid csv: sample count mismatch");
  return GridFunction(dim, origin, spacing, extents, std::move(values));
}

void GridFunction::write_binary(std::ostream& out) const {
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  put(out, kBinaryVersion);
  put(out, static_cast<std::int32_t>(dim_));
  for (std::size_t i = 0; i < 3; ++i) put(out, origin_.x[i]);
  for (std::size_t i = 0; i < 3; ++i) put(out, spacing_[i]);
  for (std::size_t i = 0; i < 3; ++i) put(out, static_cast<std::uint64_t>(extents_[i]));
  out.write(reinterpret_cast<const char*>(samples_.data()),
            static_cast<std::streamsize>(samples_.size() * sizeof(double)));
}

GridFunction GridFunction::read_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0) {
    throw ParseError("grid binary: bad magic");
  }
  if (get<std::uint32_t>(in) != kBinaryVersion) throw ParseError("grid binary: unknown version");
  const int dim = get<std::int32_t>(in);
  if (dim < 1 || dim > 3) throw ParseError("grid binary: bad dimension");
  Point origin = Point::origin(dim);
  std::array<double, 3> spacing{};
  std::array<std::size_t, 3> extents{};
  for (std::size_t i = 0; i < 3; ++i) origin.x[i] = get<double>(in);
  for (std::size_t i = 0; i < 3; ++i) spacing[i] = get<double>(in);
  std::size_t total = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    extents[i] = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (i < static_cast<std::size_t>(dim)) {
      if (extents[i] == 0 || extents[i] > (std::size_t{1} << 32)) {
        throw ParseError("grid binary: bad extent");
      }
      total *= extents[i];
    }
  }
  std::vector<double> values(total);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(total * sizeof(double)))) {
    throw ParseError("grid binary: truncated samples");
  }
  return GridFunction(dim, origin, spacing, extents, std::move(values));
}

DistributionFunction::DistributionFunction(const GridFunction& f) {
  const auto sorted = sorted_nonzero(f);
  const double cell = f.cell_measure();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (values_.empty() || sorted[i] != values_.back()) {
      values_.push_back(sorted[i]);
      measures_.push_back(0.0);
    }
    measures_.back() = cell * static_cast<double>(i + 1);
  }
}

double DistributionFunction::operator()(double lambda) const {
  if (lambda < 0.0) return kInf;
  // First distinct value <= lambda; everything before it exceeds lambda.
  const auto it = std::lower_bound(values_.begin(), values_.end(), lambda, std::greater<>());
  if (it == values_.begin()) return 0.0;
  return measures_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double DistributionFunction::support_measure() const {
  return measures_.empty() ? 0.0 : measures_.back();
}

double DistributionFunction::max_value() const { return values_.empty() ? 0.0 : values_.front(); }

double DistributionFunction::min_positive() const {
  return values_.empty() ? 0.0 : values_.back();
}

DecreasingRearrangement::DecreasingRearrangement(const GridFunction& f)
    : cell_(f.cell_measure()), sorted_(sorted_nonzero(f)) {}

double DecreasingRearrangement::operator()(double t) const {
  if (t < 0.0) throw DomainError("rearrangement argument must be nonnegative");
  const double k = std::floor(t / cell_);
  if (k >= static_cast<double>(sorted_.size())) return 0.0;
  return sorted_[static_cast<std::size_t>(k)];
}

DistributionFunction distribution_function(const GridFunction& f) {
  return DistributionFunction(f);
}

DecreasingRearrangement decreasing_rearrangement(const GridFunction& f) {
  return DecreasingRearrangement(f);
}

LorentzNormPair lorentz_norm_both(const GridFunction& f, const LorentzIndex& idx) {
  idx.validate();
  const auto sorted = sorted_nonzero(f);
  const double cell = f.cell_measure();
  return {norm_by_rearrangement(sorted, cell, idx), norm_by_distribution(sorted, cell, idx)};
}

double lorentz_norm(const GridFunction& f, const LorentzIndex& idx, NormMethod method) {
  const LorentzNormPair both = lorentz_norm_both(f, idx);
  const double scale = std::max(both.rearrangement, both.distribution);
  if (scale > 0.0 && std::abs(both.rearrangement - both.distribution) > kMethodTolerance * scale) {
    throw MethodDisagreement("rearrangement " + format_number(both.rearrangement) +
                             " vs distribution " + format_number(both.distribution));
  }
  return method == NormMethod::Rearrangement ? both.rearrangement : both.distribution;
}

double weak_norm(const GridFunction& f, double p) { return lorentz_norm(f, {p, kInf}); }

double lorentz_norm_truncated_radial(const std::function<double(double)>& profile, int n,
                                     const LorentzIndex& idx, double inner, double outer) {
  idx.validate();
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(inner > 0.0) || !(outer > inner) || !std::isfinite(outer)) {
    throw DomainError("truncated norm needs 0 < inner < outer < inf");
  }
  const double vn = unit_ball_volume(n);
  auto phi = [&](double r) {
    const double v = profile(r);
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("radial profile must be finite and nonnegative");
    }
    return v;
  };
  const double r_top = outer * (1.0 - 1e-12);
  {
    double prev = kInf;
    for (double r : log_spaced(inner, r_top, 257)) {
      const double v = phi(r);
      if (v > prev * (1.0 + 1e-9)) {
        throw DomainError("radial profile is not nonincreasing at r = " + format_number(r));
      }
      prev = v;
    }
  }
  const double top = phi(inner);
  const double bottom = phi(r_top);
  const double total = vn * (std::pow(outer, n) - std::pow(inner, n));
  if (top == 0.0) return 0.0;
  auto measure_above = [&](double lambda) {
    // rho = sup{r : phi(r) > lambda} by bisection in log r.
    double lo = std::log(inner);
    double hi = std::log(r_top);
    if (phi(r_top) > lambda) return total;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi(std::exp(mid)) > lambda) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double rho = std::exp(0.5 * (lo + hi));
    return vn * std::pow(inner, n) * std::expm1(n * (std::log(rho) - std::log(inner)));
  };
  const double p = idx.p;
  if (std::isinf(idx.alpha)) {
    auto objective = [&](double u) {
      const double r = std::exp(u);
      const double m = vn * std::pow(inner, n) * std::expm1(n * (u - std::log(inner)));
      return phi(r) * std::pow(m, 1.0 / p);
    };
    const auto grid = log_spaced(inner * (1.0 + 1e-9), r_top, 2001);
    std::size_t best_i = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = objective(std::log(grid[i]));
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    const double a = std::log(grid[best_i == 0 ? 0 : best_i - 1]);
    const double b = std::log(grid[std::min(best_i + 1, grid.size() - 1)]);
    if (b > a) {
      const auto res = boost::math::tools::brent_find_minima(
          [&](double u) { return -objective(u); }, a, b, 50);
      best = std::max(best, -res.second);
    }
    return std::max(best, bottom * std::pow(total, 1.0 / p));
  }
  const double alpha = idx.alpha;
  const double w_hi = std::log(top);
  const double w_lo = bottom > 0.0 ? std::log(bottom) : w_hi - 60.0 / alpha;
  double body = 0.0;
  if (w_hi > w_lo) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    body = integrator.integrate(
        [&](double w) {
          const double lambda = std::exp(w);
          return std::exp(alpha * (w - w_hi)) * std::pow(measure_above(lambda), alpha / p);
        },
        w_lo, w_hi, 1e-10);
  }
  const double base = bottom > 0.0
                          ? std::pow(total, alpha / p) * std::exp(alpha * (std::log(bottom) - w_hi)) / alpha
                          : 0.0;
  return top * std::pow(p * (body + base), 1.0 / alpha);
}

double lorentz_norm_truncated(const AnalyticFunction& f, int n, const LorentzIndex& idx,
                              double inner_cutoff) {
  if (!f.is_radial()) throw DomainError("truncated Lorentz norm needs a radial function");
  const double outer = f.support_radius();
  if (!std::isfinite(outer)) throw DomainError("truncated Lorentz norm needs bounded support");
  return lorentz_norm_truncated_radial([&](double r) { return std::abs(f.radial(r, n)); }, n, idx,
                                       inner_cutoff, outer);
}

}  // namespace bipot
