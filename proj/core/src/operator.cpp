#include "bipot/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>

#include "bipot/error.hpp"
#include "bipot/parallel.hpp"

namespace bipot {
namespace {

using std::numbers::pi;

constexpr int kPanelNodes = 16;
constexpr int kGradedPieces = 40;
constexpr double kRadiusFloor = kKernelRadiusFloor;

// Sphere {y : |y - q| = b} in y-space on which f(x - y) or g(x + y) is not smooth.
struct YSphere {
  Point q;
  double b = 0.0;
  bool singular = false;
};

std::vector<YSphere> y_spheres(const AnalyticFunction& f, const AnalyticFunction& g,
                               const Point& x) {
  std::vector<YSphere> out;
  for (const Feature& feat : f.features()) out.push_back({x - feat.center, feat.radius, feat.singular});
  for (const Feature& feat : g.features()) out.push_back({feat.center - x, feat.radius, feat.singular});
  for (auto& s : out) s.q.dim = x.dim;
  return out;
}

struct Panel {
  double lo;
  double hi;
  bool log_scale;
};

void add_graded(std::vector<double>& pts, double beta, double width, double sign) {
  for (int j = 0; j <= kGradedPieces; ++j) pts.push_back(beta + sign * width * std::ldexp(1.0, -j));
}

std::vector<Panel> build_panels(double floor, double rho_max, std::vector<double> pts,
                                const std::vector<double>& singular, double split,
                                double outer_step) {
  pts.push_back(floor);
  pts.push_back(rho_max);
  // Outer panels: at most outer_step wide and at most one doubling.
  for (double r = split; r < rho_max; r = std::min(r + outer_step, 2.0 * r)) pts.push_back(r);
  auto clean = [&](std::vector<double>& v) {
    std::vector<double> kept;
    for (double p : v) {
      if (p >= floor && p <= rho_max && std::isfinite(p)) kept.push_back(p);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<double> uniq;
    for (double p : kept) {
      if (uniq.empty() || p - uniq.back() > 1e-14 * std::max(p, 1e-300)) uniq.push_back(p);
    }
    v = std::move(uniq);
  };
  for (double beta : singular) pts.push_back(beta);
  clean(pts);
  for (double beta : singular) {
    if (beta <= floor || beta >= rho_max) continue;
    const auto it = std::lower_bound(pts.begin(), pts.end(), beta);
    const double left = it == pts.begin() ? floor : *std::prev(it);
    const double right = (it + 1 == pts.end()) ? rho_max : *(it + 1);
    std::vector<double> graded;
    if (beta - left > 0.0) add_graded(graded, beta, 0.5 * (beta - left), -1.0);
    if (right - beta > 0.0) add_graded(graded, beta, 0.5 * (right - beta), 1.0);
    pts.insert(pts.end(), graded.begin(), graded.end());
  }
  clean(pts);
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    panels.push_back({lo, hi, hi <= split * (1.0 + 1e-12)});
  }
  return panels;
}

class AngularIntegrand {
 public:
  AngularIntegrand(const AnalyticFunction& f, const AnalyticFunction& g, const Point& x, int n,
                   int angular_nodes)
      : f_(f), g_(g), x_(x), n_(n), spheres_(y_spheres(f, g, x)),
        max_pieces_(std::max(1, angular_nodes / kPanelNodes)) {
    x_.dim = n;
    centred_radial_ = n >= 2 && x_.norm() == 0.0 && f.is_radial() && g.is_radial();
    if (n == 3 && !(f.is_radial() && g.is_radial())) {
      throw DomainError("three-dimensional evaluation needs radial f and g");
    }
  }

  double operator()(double rho) const {
    switch (n_) {
      case 1: {
        const double a = x_[0];
        return f_(Point(a - rho)) * g_(Point(a + rho)) + f_(Point(a + rho)) * g_(Point(a - rho));
      }
      case 2: return centred_radial_ ? centred(rho) : circle(rho);
      default: return centred_radial_ ? centred(rho) : sphere(rho);
    }
  }

 private:
  double centred(double rho) const {
    return unit_sphere_area(n_) * std::pow(rho, n_ - 1) * f_.radial(rho, n_) * g_.radial(rho, n_);
  }

  void subdivide(std::vector<double>& cuts, double lo, double hi) const {
    const double width = (hi - lo) / max_pieces_;
    for (int i = 1; i < max_pieces_; ++i) cuts.push_back(lo + width * i);
  }

  static void sort_unique(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return b - a < 1e-15; }),
            v.end());
  }

  double circle(double rho) const {
    std::vector<double> cuts{0.0, 2.0 * pi};
    subdivide(cuts, 0.0, 2.0 * pi);
    auto wrap = [](double t) {
      t = std::fmod(t, 2.0 * pi);
      return t < 0.0 ? t + 2.0 * pi : t;
    };
    for (const YSphere& s : spheres_) {
      const double qn = s.q.norm();
      if (qn == 0.0) continue;
      const double tq = std::atan2(s.q[1], s.q[0]);
      const double kappa = (rho * rho + qn * qn - s.b * s.b) / (2.0 * rho * qn);
      if (std::abs(kappa) <= 1.0) {
        const double d = std::acos(kappa);
        cuts.push_back(wrap(tq + d));
        cuts.push_back(wrap(tq - d));
      }
      if (s.singular) {
        const double floor_angle = std::max(std::abs(rho - qn) / qn * 1e-3, 1e-12);
        for (int j = 1; j <= kGradedPieces; ++j) {
          const double w = pi * std::ldexp(1.0, -j);
          if (w < floor_angle) break;
          cuts.push_back(wrap(tq + w));
          cuts.push_back(wrap(tq - w));
        }
        cuts.push_back(wrap(tq));
      }
    }
    sort_unique(cuts);
    const GaussRule& rule = gauss_rule(kPanelNodes);
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      sum += integrate_gauss(
          [&](double t) {
            Point e = Point::origin(2);
            e[0] = rho * std::cos(t);
            e[1] = rho * std::sin(t);
            return f_(x_ - e) * g_(x_ + e);
          },
          cuts[i], cuts[i + 1], rule);
    }
    return rho * sum;
  }

  double sphere(double rho) const {
    const double xn = x_.norm();
    std::vector<double> cuts{-1.0, 1.0};
    subdivide(cuts, -1.0, 1.0);
    for (const YSphere& s : spheres_) {
      // q = +-x for radial features; q.e = +-|x| c.
      const double qn = s.q.norm();
      if (qn == 0.0) continue;
      const double kappa = (rho * rho + qn * qn - s.b * s.b) / (2.0 * rho * qn);
      const double sign = (s.q[0] * x_[0] + s.q[1] * x_[1] + s.q[2] * x_[2]) >= 0.0 ? 1.0 : -1.0;
      if (std::abs(kappa) <= 1.0) cuts.push_back(sign * kappa);
      if (s.singular) {
        for (int j = 1; j <= 26; ++j) cuts.push_back(sign * (1.0 - std::ldexp(1.0, -2 * j)));
      }
    }
    sort_unique(cuts);
    const GaussRule& rule = gauss_rule(kPanelNodes);
    double sum = 0.0;
    const double base = xn * xn + rho * rho;
    const double cross = 2.0 * xn * rho;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      sum += integrate_gauss(
          [&](double c) {
            const double rm = std::sqrt(std::max(base - cross * c, 0.0));
            const double rp = std::sqrt(std::max(base + cross * c, 0.0));
            return f_.radial(rm, 3) * g_.radial(rp, 3);
          },
          cuts[i], cuts[i + 1], rule);
    }
    return 2.0 * pi * rho * rho * sum;
  }

  const AnalyticFunction& f_;
  const AnalyticFunction& g_;
  Point x_;
  int n_;
  std::vector<YSphere> spheres_;
  int max_pieces_;
  bool centred_radial_ = false;
};

struct RadialIntegral {
  std::vector<Panel> panels;
  std::vector<double> contributions;

  // Sum over panels lying in [eps, inf).
  double above(double eps) const {
    double s = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (panels[i].lo >= eps * (1.0 - 1e-12)) s += contributions[i];
    }
    return s;
  }
};

template <class Weight>
RadialIntegral integrate_radial(const AngularIntegrand& psi, Weight&& weight,
                                const std::vector<Panel>& panels) {
  RadialIntegral out;
  out.panels = panels;
  out.contributions.reserve(panels.size());
  const GaussRule& rule = gauss_rule(kPanelNodes);
  for (const Panel& p : panels) {
    double v;
    if (p.log_scale) {
      v = integrate_gauss(
          [&](double u) {
            const double r = std::exp(u);
            return weight(r) * psi(r) * r;
          },
          std::log(p.lo), std::log(p.hi), rule);
    } else {
      v = integrate_gauss([&](double r) { return weight(r) * psi(r); }, p.lo, p.hi, rule);
    }
    out.contributions.push_back(v);
  }
  return out;
}

struct Geometry {
  double rho_max = 0.0;
  bool support_clipped = false;
  std::vector<double> regular;
  std::vector<double> singular;
};

Geometry radial_geometry(const AnalyticFunction& f, const AnalyticFunction& g, const Point& x,
                         double outer) {
  Geometry geo;
  const double xn = x.norm();
  const double reach = xn + std::min(f.support_radius(), g.support_radius());
  geo.rho_max = std::min(outer, reach);
  geo.support_clipped = reach > outer;
  for (const YSphere& s : y_spheres(f, g, x)) {
    const double qn = s.q.norm();
    if (s.b > 0.0) {
      geo.regular.push_back(std::abs(qn - s.b));
      geo.regular.push_back(qn + s.b);
    } else if (s.singular) {
      geo.singular.push_back(qn);
    } else {
      geo.regular.push_back(qn);
    }
  }
  return geo;
}

std::vector<double> dyadic_ladder(double anchor, double floor, double top) {
  std::vector<double> out;
  double a = anchor;
  while (a > top * (1.0 + 1e-12)) a *= 0.5;
  while (a * 2.0 <= top * (1.0 + 1e-12)) a *= 2.0;
  for (; a >= floor * (1.0 - 1e-12); a *= 0.5) out.push_back(a);
  return out;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(inner_cutoff >= 0.0) || !std::isfinite(inner_cutoff)) {
    throw DomainError("inner_cutoff must be finite and nonnegative");
  }
  if (inner_cutoff > 0.0 && inner_cutoff < kRadiusFloor) {
    throw DomainError("inner_cutoff below the kernel radius floor");
  }
  if (!(split_radius > kRadiusFloor) || !(outer_radius > split_radius) || !std::isfinite(outer_radius)) {
    throw DomainError("need floor < split_radius < outer_radius < inf");
  }
  if (radial_nodes < 0) throw DomainError("radial_nodes must be nonnegative");
  if (angular_nodes < kPanelNodes) throw DomainError("angular_nodes must be >= 16");
}

int QuadratureSpec::effective_radial_nodes(int n) const {
  if (radial_nodes > 0) return radial_nodes;
  return n == 1 ? 1024 : 256;
}

std::shared_ptr<const KernelTable> shared_kernel_table(const PotentialParams& params) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const KernelTable>> cache;
  params.validate();
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{params.n, params.s}];
  if (!slot) slot = std::make_shared<const KernelTable>(params);
  return slot;
}

PotentialEvaluator::PotentialEvaluator(PotentialParams params, QuadratureSpec spec,
                                       KernelKind kind)
    : params_(params), spec_(spec), kind_(kind) {
  params_.validate();
  spec_.validate();
  if (kind_ == KernelKind::Bessel) table_ = shared_kernel_table(params_);
}

double PotentialEvaluator::kernel(double r) const {
  if (kind_ == KernelKind::Riesz) return std::pow(r, params_.s - params_.n);
  return (*table_)(r);
}

BilinearEvalResult PotentialEvaluator::bilinear(const AnalyticFunction& f,
                                                const AnalyticFunction& g,
                                                const Point& x) const {
  return bilinear(f, g, x, spec_.inner_cutoff);
}

BilinearEvalResult PotentialEvaluator::bilinear(const AnalyticFunction& f,
                                                const AnalyticFunction& g, const Point& x,
                                                double inner_cutoff) const {
  if (x.dim != params_.n) throw DomainError("point dimension does not match n");
  if (!(inner_cutoff >= 0.0) || (inner_cutoff > 0.0 && inner_cutoff < kRadiusFloor)) {
    throw DomainError("inner_cutoff must be 0 or at least the radius floor");
  }
  BilinearEvalResult res;
  const Geometry geo = radial_geometry(f, g, x, spec_.outer_radius);
  if (geo.rho_max <= kRadiusFloor || (inner_cutoff > 0.0 && inner_cutoff >= geo.rho_max)) {
    res.tail = TailVerdict::Converged;
    res.cutoff_used = inner_cutoff;
    return res;
  }
  const AngularIntegrand psi(f, g, x, params_.n, spec_.angular_nodes);
  const double top = std::min(spec_.split_radius, geo.rho_max);
  const double anchor = inner_cutoff > 0.0 ? inner_cutoff : spec_.split_radius;
  const std::vector<double> ladder = dyadic_ladder(anchor, kRadiusFloor, top);
  std::vector<double> pts = geo.regular;
  pts.insert(pts.end(), ladder.begin(), ladder.end());
  const double step =
      (spec_.outer_radius - spec_.split_radius) /
      std::max(1, spec_.effective_radial_nodes(params_.n) / kPanelNodes);
  const auto panels =
      build_panels(kRadiusFloor, geo.rho_max, pts, geo.singular, spec_.split_radius, step);
  const RadialIntegral integral =
      integrate_radial(psi, [&](double r) { return kernel(r); }, panels);

  std::vector<double> partial;
  for (double eps : ladder) partial.push_back(integral.above(eps));
  const TailAnalysis tail =
      ladder.size() >= 4 ? classify_tail(ladder, partial) : TailAnalysis{};
  res.tail = tail.verdict;
  res.diverged = tail.verdict == TailVerdict::Diverged;
  if (inner_cutoff > 0.0) {
    res.value = integral.above(inner_cutoff);
    res.cutoff_used = inner_cutoff;
  } else if (tail.verdict == TailVerdict::Converged) {
    res.value = tail.limit;
    res.cutoff_used = 0.0;
  } else {
    res.value = integral.above(kRadiusFloor);
    res.cutoff_used = kRadiusFloor;
  }

  if (geo.support_clipped) {
    if (kind_ == KernelKind::Riesz) {
      throw QuadratureError("outer_radius too small: Riesz tail beyond it is not integrable");
    }
    if (f.bounded() && g.bounded()) {
      const int n = params_.n;
      const double bound = f.sup_norm(n) * g.sup_norm(n) * unit_sphere_area(n) *
                           kernel(spec_.outer_radius) * std::pow(spec_.outer_radius, n - 1) * 2.0;
      if (bound > 1e-6 * std::max(std::abs(res.value), 1e-300)) {
        throw QuadratureError("outer_radius too small: kernel tail beyond " +
                              format_number(spec_.outer_radius) + " is not negligible");
      }
    }
  }
  return res;
}

std::vector<double> PotentialEvaluator::truncated(const AnalyticFunction& f,
                                                  const AnalyticFunction& g, const Point& x,
                                                  std::span<const double> cutoffs) const {
  if (x.dim != params_.n) throw DomainError("point dimension does not match n");
  for (double c : cutoffs) {
    if (!(c >= kRadiusFloor) || !std::isfinite(c)) {
      throw DomainError("cutoffs must be finite and at least the radius floor");
    }
  }
  const Geometry geo = radial_geometry(f, g, x, spec_.outer_radius);
  std::vector<double> out(cutoffs.size(), 0.0);
  if (geo.rho_max <= kRadiusFloor) return out;
  const AngularIntegrand psi(f, g, x, params_.n, spec_.angular_nodes);
  const double top = std::min(spec_.split_radius, geo.rho_max);
  std::vector<double> pts = geo.regular;
  for (double c : dyadic_ladder(spec_.split_radius, kRadiusFloor, top)) pts.push_back(c);
  pts.insert(pts.end(), cutoffs.begin(), cutoffs.end());
  const double step =
      (spec_.outer_radius - spec_.split_radius) /
      std::max(1, spec_.effective_radial_nodes(params_.n) / kPanelNodes);
  const auto panels =
      build_panels(kRadiusFloor, geo.rho_max, pts, geo.singular, spec_.split_radius, step);
  const RadialIntegral integral =
      integrate_radial(psi, [&](double r) { return kernel(r); }, panels);
  for (std::size_t i = 0; i < cutoffs.size(); ++i) out[i] = integral.above(cutoffs[i]);
  return out;
}

double PotentialEvaluator::linear(const AnalyticFunction& f, const Point& x) const {
  const BilinearEvalResult r = bilinear(f, AnalyticFunction::constant(1.0), x);
  if (r.diverged) throw QuadratureError("linear potential diverges at the evaluation point");
  return r.value;
}

double PotentialEvaluator::dyadic_piece(int k, const AnalyticFunction& f,
                                        const AnalyticFunction& g, const Point& x) const {
  if (x.dim != params_.n) throw DomainError("point dimension does not match n");
  if (std::abs(k) > 26) throw DomainError("dyadic index out of range");
  const double radius = std::ldexp(1.0, -k);
  const Geometry geo = radial_geometry(f, g, x, std::numeric_limits<double>::infinity());
  const double rho_max = std::min(radius, geo.rho_max);
  if (rho_max <= kRadiusFloor) return 0.0;
  const AngularIntegrand psi(f, g, x, params_.n, spec_.angular_nodes);
  const double split = std::min(spec_.split_radius, rho_max);
  const std::vector<double> ladder = dyadic_ladder(split, kRadiusFloor, split);
  std::vector<double> pts = geo.regular;
  pts.insert(pts.end(), ladder.begin(), ladder.end());
  const double step = std::max(rho_max - split, 1e-12) /
                      std::max(1, spec_.effective_radial_nodes(params_.n) / kPanelNodes);
  const auto panels = build_panels(kRadiusFloor, rho_max, pts, geo.singular, split, step);
  const RadialIntegral integral = integrate_radial(psi, [](double) { return 1.0; }, panels);
  std::vector<double> partial;
  for (double eps : ladder) partial.push_back(integral.above(eps));
  if (ladder.size() >= 4) {
    const TailAnalysis tail = classify_tail(ladder, partial);
    if (tail.verdict == TailVerdict::Converged) return tail.limit;
    if (tail.verdict == TailVerdict::Diverged) {
      throw QuadratureError("dyadic piece is not locally integrable");
    }
  }
  return integral.above(kRadiusFloor);
}

std::vector<BilinearEvalResult> PotentialEvaluator::batch(const AnalyticFunction& f,
                                                          const AnalyticFunction& g,
                                                          std::span<const Point> points,
                                                          int jobs) const {
  std::vector<BilinearEvalResult> out(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) { out[i] = bilinear(f, g, points[i]); });
  return out;
}

BilinearEvalResult bilinear_bessel(const AnalyticFunction& f, const AnalyticFunction& g,
                                   const Point& x, const PotentialParams& params,
                                   const QuadratureSpec& spec) {
  return PotentialEvaluator(params, spec, KernelKind::Bessel).bilinear(f, g, x);
}

BilinearEvalResult bilinear_riesz(const AnalyticFunction& f, const AnalyticFunction& g,
                                  const Point& x, const PotentialParams& params,
                                  const QuadratureSpec& spec) {
  return PotentialEvaluator(params, spec, KernelKind::Riesz).bilinear(f, g, x);
}

double linear_bessel(const AnalyticFunction& f, const Point& x, const PotentialParams& params,
                     const QuadratureSpec& spec) {
  return PotentialEvaluator(params, spec).linear(f, x);
}

double dyadic_weight(int k, const PotentialParams& params) {
  params.validate();
  if (k >= 0) return std::pow(2.0, k * (params.n - params.s));
  return std::exp(-std::ldexp(1.0, -k) / 4.0);
}

double dyadic_piece(int k, const AnalyticFunction& f, const AnalyticFunction& g, const Point& x,
                    const PotentialParams& params, const QuadratureSpec& spec) {
  return PotentialEvaluator(params, spec).dyadic_piece(k, f, g, x);
}

std::vector<BilinearEvalResult> bilinear_batch(const AnalyticFunction& f,
                                               const AnalyticFunction& g,
                                               std::span<const Point> points,
                                               const PotentialParams& params,
                                               const QuadratureSpec& spec, int jobs) {
  return PotentialEvaluator(params, spec).batch(f, g, points, jobs);
}

void write_batch_csv(std::ostream& out, int n, std::span<const Point> points,
                     std::span<const BilinearEvalResult> results) {
  if (points.size() != results.size()) throw DomainError("points and results differ in length");
  if (n == 1) {
    out << "x";
  } else {
    for (int i = 0; i < n; ++i) out << (i ? ",x" : "x") << i;
  }
  out << ",value,diverged,cutoff_used\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int d = 0; d < n; ++d) out << (d ? "," : "") << format_number(points[i][d]);
    out << ',' << format_number(results[i].value) << ',' << (results[i].diverged ? 1 : 0) << ','
        << format_number(results[i].cutoff_used) << '\n';
  }
}

}  // namespace bipot
