#pragma once

#include <vector>

namespace bipot {

// Ambient dimension n and smoothing order s, with n in {1, 2, 3} and 0 < s < n.
struct PotentialParams {
  int n = 1;
  double s = 0.5;

  PotentialParams() = default;
  PotentialParams(int dimension, double order);

  void validate() const;
  double ratio() const { return s / n; }
};

struct KernelEvalSpec {
  int subordination_nodes = 2048;
  double t_min = 1e-8;
  double t_max = 1e3;
  double tolerance = 1e-8;

  void validate() const;
};

// Smallest radius accepted by direct kernel evaluation.
inline constexpr double kKernelRadiusFloor = 1e-8;

double unit_ball_volume(int n);
// Surface area of the unit sphere in R^n.
double unit_sphere_area(int n);

// G_s(r) through its heat-semigroup subordination integral.
class BesselKernel {
 public:
  explicit BesselKernel(PotentialParams params, KernelEvalSpec spec = {});

  const PotentialParams& params() const { return params_; }
  const KernelEvalSpec& spec() const { return spec_; }

  // Evaluates with the configured node count and re-checks at double the
  // count; throws QuadratureError when the two differ beyond tolerance.
  double operator()(double radius) const;

  // Single evaluation with an explicit node count, no refinement check.
  double evaluate(double radius, int nodes) const;

  // lim_{r -> 0} G(r) r^{n - s}.
  double small_radius_constant() const;

 private:
  friend class KernelTable;
  double integrate(double radius, int nodes) const;

  PotentialParams params_;
  KernelEvalSpec spec_;
  double log_prefactor_;
};

double eval_bessel_kernel(const PotentialParams& params, const KernelEvalSpec& spec,
                          double radius);

// Unnormalised Riesz profile r^{s - n}.
double eval_riesz_kernel(const PotentialParams& params, double radius);

// Closed form G via the modified Bessel function K_{(n-s)/2}; used as an
// independent cross-check of the subordination integral.
double bessel_kernel_closed_form(const PotentialParams& params, double radius);

struct KernelConstants {
  double c_small = 0.0;    // sup of G(r) r^{n-s} on (0, 1]
  double c_lower = 0.0;    // inf of the same quantity
  bool lower_degenerate = false;
  double c_large = 0.0;    // G(r) <= c_large e^{-c_decay r} on [1, 10]
  double c_decay = 0.0;
  double decay_r_squared = 0.0;
};

KernelConstants fit_kernel_constants(const PotentialParams& params,
                                     const KernelEvalSpec& spec, int grid_points = 200);

// Interpolated G on [kKernelRadiusFloor, r_max]; direct evaluation beyond.
class KernelTable {
 public:
  explicit KernelTable(PotentialParams params, KernelEvalSpec spec = {},
                       double r_max = 64.0, int nodes = 4096);

  double operator()(double radius) const;
  const BesselKernel& exact() const { return kernel_; }
  const PotentialParams& params() const { return kernel_.params(); }

 private:
  BesselKernel kernel_;
  double v_lo_;
  double v_hi_;
  double dv_;
  std::vector<double> h_;
};

}  // namespace bipot
