#include "bipot/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bipot/error.hpp"
#include "bipot/numerics.hpp"

namespace bipot {

using std::numbers::pi;

PotentialParams::PotentialParams(int dimension, double order) : n(dimension), s(order) {
  validate();
}

void PotentialParams::validate() const {
  if (n < 1 || n > 3) {
    throw DomainError("dimension must be 1, 2 or 3, got " + std::to_string(n));
  }
  if (!(s > 0.0) || !(s < n) || !std::isfinite(s)) {
    throw DomainError("order s must satisfy 0 < s < n");
  }
}

void KernelEvalSpec::validate() const {
  if (subordination_nodes < 16) throw DomainError("subordination_nodes must be >= 16");
  if (!(t_min > 0.0) || !(t_max > t_min)) {
    throw DomainError("subordination range needs 0 < t_min < t_max");
  }
  if (!(tolerance > 0.0)) throw DomainError("kernel tolerance must be positive");
}

double unit_ball_volume(int n) {
  return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

BesselKernel::BesselKernel(PotentialParams params, KernelEvalSpec spec)
    : params_(params), spec_(spec) {
  params_.validate();
  spec_.validate();
  log_prefactor_ = -0.5 * params_.s * std::log(4.0 * pi) - std::lgamma(0.5 * params_.s);
}

double BesselKernel::evaluate(double radius, int nodes) const {
  if (!(radius >= kKernelRadiusFloor) || !std::isfinite(radius)) {
    throw DomainError("kernel radius below floor or not finite");
  }
  if (nodes < 16) throw DomainError("too few subordination nodes");
  return integrate(radius, nodes);
}

double BesselKernel::integrate(double radius, int nodes) const {
  const double r2 = radius * radius;
  // Widen the window so that both exponential tails are resolved.
  const double t_lo = std::min(spec_.t_min, pi * r2 / 60.0);
  const double t_hi = std::max(spec_.t_max, 4.0 * pi * (radius + 60.0));
  const double u_lo = std::log(t_lo);
  const double u_hi = std::log(t_hi);
  const double du = (u_hi - u_lo) / (nodes - 1);
  const double power = 0.5 * (params_.s - params_.n);
  double sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double u = u_lo + du * j;
    const double t = std::exp(u);
    const double w = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
    sum += w * std::exp(-pi * r2 / t - t / (4.0 * pi) + power * u + log_prefactor_);
  }
  return sum * du;
}

double BesselKernel::operator()(double radius) const {
  const double coarse = evaluate(radius, spec_.subordination_nodes);
  const double fine = evaluate(radius, 2 * spec_.subordination_nodes);
  if (std::abs(fine - coarse) > spec_.tolerance * std::abs(fine)) {
    throw QuadratureError("subordination integral not converged at r = " +
                          std::to_string(radius));
  }
  return fine;
}

double BesselKernel::small_radius_constant() const {
  const double n = params_.n;
  const double s = params_.s;
  return std::tgamma(0.5 * (n - s)) /
         (std::pow(2.0, s) * std::pow(pi, 0.5 * n) * std::tgamma(0.5 * s));
}

double eval_bessel_kernel(const PotentialParams& params, const KernelEvalSpec& spec,
                          double radius) {
  return BesselKernel(params, spec)(radius);
}

double eval_riesz_kernel(const PotentialParams& params, double radius) {
  params.validate();
  if (!(radius > 0.0)) throw DomainError("Riesz kernel needs r > 0");
  return std::pow(radius, params.s - params.n);
}

double bessel_kernel_closed_form(const PotentialParams& params, double radius) {
  params.validate();
  if (!(radius > 0.0)) throw DomainError("kernel needs r > 0");
  const double n = params.n;
  const double s = params.s;
  const double nu = 0.5 * (n - s);
  return boost::math::cyl_bessel_k(nu, radius) * std::pow(radius, -nu) /
         (std::pow(2.0, 0.5 * (n + s - 2.0)) * std::pow(pi, 0.5 * n) * std::tgamma(0.5 * s));
}

KernelConstants fit_kernel_constants(const PotentialParams& params,
                                     const KernelEvalSpec& spec, int grid_points) {
  if (grid_points < 10) throw DomainError("grid_points must be >= 10");
  const BesselKernel kernel(params, spec);
  KernelConstants out;
  const double power = params.n - params.s;
  out.c_lower = std::numeric_limits<double>::infinity();
  for (double r : log_spaced(kKernelRadiusFloor, 1.0, grid_points)) {
    const double v = kernel(r) * std::pow(r, power);
    out.c_small = std::max(out.c_small, v);
    out.c_lower = std::min(out.c_lower, v);
  }
  out.lower_degenerate = out.c_lower < 1e-6;

  const int m = std::max(grid_points / 4, 10);
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < m; ++i) {
    const double r = 1.0 + 9.0 * i / (m - 1);
    xs.push_back(r);
    ys.push_back(std::log(kernel(r)));
  }
  const LinearFit fit = fit_line(xs, ys);
  out.decay_r_squared = fit.r_squared;
  if (fit.r_squared < 0.98) {
    throw FitError("exponential decay fit has R^2 = " + std::to_string(fit.r_squared));
  }
  out.c_decay = -fit.slope;
  // Lift the intercept so the envelope dominates every sampled point.
  double lift = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lift = std::max(lift, ys[i] - (fit.intercept + fit.slope * xs[i]));
  }
  out.c_large = std::exp(fit.intercept + lift);
  return out;
}

KernelTable::KernelTable(PotentialParams params, KernelEvalSpec spec, double r_max,
                         int nodes)
    : kernel_(params, spec) {
  if (!(r_max > 1.0) || nodes < 64) throw DomainError("invalid kernel table extent");
  v_lo_ = std::log(kKernelRadiusFloor);
  v_hi_ = std::log(r_max);
  dv_ = (v_hi_ - v_lo_) / (nodes - 1);
  const double power = params.n - params.s;
  h_.resize(static_cast<std::size_t>(nodes) + 2);
  // One ghost node on each side keeps the 4-point stencil inside the array.
  for (int i = -1; i <= nodes; ++i) {
    const double v = v_lo_ + dv_ * i;
    const double r = std::exp(v);
    double g = kernel_.integrate(r, spec.subordination_nodes);
    if (i % 64 == 0) {
      const double fine = kernel_.integrate(r, 2 * spec.subordination_nodes);
      if (std::abs(fine - g) > spec.tolerance * fine) {
        throw QuadratureError("kernel table node not converged");
      }
    }
    h_[static_cast<std::size_t>(i + 1)] = std::log(g) + power * v;
  }
}

double KernelTable::operator()(double radius) const {
  if (!(radius >= kKernelRadiusFloor)) {
    throw DomainError("kernel radius below floor");
  }
  const double v = std::log(radius);
  if (v > v_hi_) return kernel_.evaluate(radius, kernel_.spec().subordination_nodes);
  const double x = (v - v_lo_) / dv_;
  const int n_nodes = static_cast<int>(h_.size()) - 2;
  int i = std::clamp(static_cast<int>(std::floor(x)), 0, n_nodes - 2);
  const double t = x - i;
  // Cubic Lagrange on nodes i-1, i, i+1, i+2 (array offset +1).
  const double* p = &h_[static_cast<std::size_t>(i)];
  const double tm1 = t + 1.0;
  const double t1 = t - 1.0;
  const double t2 = t - 2.0;
  const double h = -p[0] * t * t1 * t2 / 6.0 + p[1] * tm1 * t1 * t2 / 2.0 -
                   p[2] * tm1 * t * t2 / 2.0 + p[3] * tm1 * t * t1 / 6.0;
  const double power = kernel_.params().n - kernel_.params().s;
  return std::exp(h - power * v);
}

}  // namespace bipot
