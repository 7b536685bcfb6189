#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bipot/funcfam.hpp"
#include "bipot/kernel.hpp"
#include "bipot/lorentz.hpp"
#include "bipot/operator.hpp"

namespace bipot {

// Reciprocal exponents (1/p, 1/q, 1/r); 0 encodes an infinite exponent.
struct ExponentTriple {
  double inv_p = 0.0;
  double inv_q = 0.0;
  double inv_r = 0.0;

  void validate() const;
};

enum class RegionLabel {
  StrongLebesgue,
  FractionalSurfaceLorentz,
  WeakEndpoint,
  InfinityTriangle,
  CriticalLineFail,
  OutsideStripFail,
};

const char* to_string(RegionLabel label);

struct RegionVerdict {
  RegionLabel label = RegionLabel::OutsideStripFail;
  std::vector<std::string> witnesses;
};

RegionVerdict classify_exponents(const ExponentTriple& triple, const PotentialParams& params);

// One named pass/fail condition inside a report.  Non-gating checks are
// diagnostics and do not affect the verdict.
struct ReportCheck {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", ">"
  double threshold = 0.0;
  bool passed = false;
  bool gating = true;
};

enum class FitRule {
  None,           // no regression; verdict from checks only
  SlopeMatch,     // |slope - expected| <= tolerance and R^2 >= min_r_squared
  PositiveSlope,  // slope > 0 and R^2 >= min_r_squared
};

const char* to_string(FitRule rule);

struct ExperimentReport {
  std::string experiment_id;
  std::vector<std::pair<std::string, std::string>> config;
  std::string parameter_name;
  std::vector<double> parameter_sequence;
  std::string measured_name;
  std::vector<double> measured;
  // Auxiliary named sequences aligned with parameter_sequence or standalone.
  std::vector<std::pair<std::string, std::vector<double>>> series;
  FitRule fit_rule = FitRule::None;
  std::string fit_model;
  double fit_slope = 0.0;
  double fit_intercept = 0.0;
  double r_squared = 0.0;
  double expected_slope = 0.0;
  double tolerance = 0.0;
  double min_r_squared = 0.98;
  std::vector<ReportCheck> checks;
  std::vector<std::string> notes;
  bool verdict = false;

  void add_check(std::string name, double value, std::string relation, double threshold,
                 bool gating = true);
  void add_flag(std::string name, bool ok, bool gating = true);
  // Fits measured_y against fit_x and stores slope, intercept and R^2.
  void fit(const std::vector<double>& fit_x, const std::vector<double>& fit_y);
  bool fit_passed() const;
  // verdict = fit rule satisfied and every gating check passed.
  void finalize();
};

// Machine-readable record; keys in a fixed order, numbers in shortest
// round-trip form, non-finite numbers as null.
std::string report_to_json(const ExperimentReport& report);
std::string reports_to_json(const std::vector<ExperimentReport>& reports);
// Long-format rows: experiment_id,index,parameter,measured plus the fit summary.
std::string reports_to_csv(const std::vector<ExperimentReport>& reports);
std::string report_to_table(const ExperimentReport& report);

// Quadrature used by the experiments; n = 1 gets the evaluator default.
QuadratureSpec default_experiment_quadrature(const PotentialParams& params);

struct ScalingUpperArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  std::vector<double> radii{4, 8, 16, 32};
  ExponentTriple triple{0.5, 0.5, 1.0};
  int plateau_samples = 16;
  void validate() const;
};

struct ScalingLowerArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  std::vector<double> lambdas{1, 2, 4, 8, 16};
  ExponentTriple triple{0.5, 0.5, 0.5};
  // The off-surface twin uses inv_r * off_surface_factor.
  double off_surface_factor = 0.5;
  int profile_samples = 48;
  void validate() const;
};

struct CriticalDivergenceArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  double p = 4.0;
  double q = 4.0;
  double beta = 0.5;
  double gamma = 0.5;
  std::vector<double> cutoffs;
  double linear_radius = 0.25;
  void validate() const;
};

struct SharpnessInteriorArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  double p = 2.0;
  double q = 2.0;
  double alpha = 1.0 / 1.2;
  std::vector<double> cutoffs;
  int radii = 30;
  // Control index satisfies 1/alpha_c = 1/p + 1/q - control_gap.
  double control_gap = 0.05;
  void validate() const;
};

struct SharpnessEndpointArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  double p = 1.5;
  double q_endpoint = INFINITY;
  double alpha = 1.0;
  std::vector<double> cutoffs;
  int radii = 30;
  void validate() const;
};

struct MollifierBlowupArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  double alpha = 2.0;
  std::vector<double> epsilons;
  int profile_nodes = 96;
  void validate() const;
};

struct InterpolationArgs {
  double A = 1.0;
  double B = 2.0;
  double r1 = 1.0;
  double r2 = 2.0;
  double theta = 0.5;
  double alpha = 2.0;
  // h to test; when empty the envelope itself is sampled on a 1-D grid.
  std::optional<GridFunction> h;
  int samples = 100;
  void validate() const;
};

struct OneilCase {
  std::string label;
  AnalyticFunction f;
  AnalyticFunction g;
  double p = 4.0 / 3.0;
  double q = 4.0 / 3.0;
  double r = 2.0;
  double alpha1 = 4.0 / 3.0;
  double alpha2 = 4.0 / 3.0;
  double alpha = 2.0;
  void validate() const;
};

struct OneilArgs {
  std::vector<OneilCase> cases;
  double half_width = 4.0;
  std::size_t cells = 4097;
  void validate() const;
};

struct HalfNormArgs {
  PotentialParams params{1, 0.5};
  QuadratureSpec quadrature;
  std::vector<double> widths;
  std::vector<double> translations{0.0, 1.0, 5.0};
  double translation_width = 0.1;
  void validate() const;
};

struct BarycentricArgs {
  PotentialParams params{1, 0.5};
  double p = 2.0;
  double q = 2.0;
  double p0 = 1.0 / 0.75;
  int draws = 50;
  std::uint64_t seed = 20240601;
  void validate() const;
};

ExperimentReport run_scaling_upper(const ScalingUpperArgs& args);
ExperimentReport run_scaling_lower(const ScalingLowerArgs& args);
ExperimentReport run_critical_divergence(const CriticalDivergenceArgs& args);
ExperimentReport run_sharpness_interior(const SharpnessInteriorArgs& args);
ExperimentReport run_sharpness_endpoint(const SharpnessEndpointArgs& args);
ExperimentReport run_mollifier_blowup(const MollifierBlowupArgs& args);
ExperimentReport run_interpolation_crossover(const InterpolationArgs& args);
ExperimentReport run_oneil_check(const OneilArgs& args);
ExperimentReport run_half_norm_uniformity(const HalfNormArgs& args);
ExperimentReport run_barycentric(const BarycentricArgs& args);

// Crossover point of A t^{-1/r1} and B t^{-1/r2}.
double crossover_point(double A, double B, double r1, double r2);
// K with ||min(A t^{-1/r1}, B t^{-1/r2})||_{r_theta, alpha} = K A^{1-theta} B^theta.
double envelope_constant(double r1, double r2, double theta, double alpha);

// Barycentric coordinates of (1/p, 1/q, 1/r) with respect to
// P0 = (1, 1, 2 - s/n), P1 = (1/p0, 0, 1/p0 - s/n), P2 = (0, 1/p0, 1/p0 - s/n).
std::array<double, 3> compute_barycentric(double p, double q, double p0,
                                          const PotentialParams& params);

// Largest componentwise error of theta0 P0 + theta1 P1 + theta2 P2 against
// (1/p, 1/q, 1/p + 1/q - s/n).
double barycentric_residual(double p, double q, double p0, const PotentialParams& params,
                            const std::array<double, 3>& theta);

// Catalog of experiments with default settings.
const std::vector<std::string>& catalog_ids();
bool is_catalog_id(const std::string& id);

// A validated experiment ready to run; building one performs every
// precondition check without computing anything.
struct ExperimentPlan {
  std::string id;
  std::vector<std::pair<std::string, std::string>> config;
  std::function<ExperimentReport()> run;
};

// Builds the plan for a catalog id from dimension settings and overrides of
// the form key -> textual value (numbers or comma separated lists).  Unknown
// keys and violated preconditions raise DomainError or ParseError.
ExperimentPlan make_experiment_plan(
    const std::string& id, const PotentialParams& params,
    const std::optional<QuadratureSpec>& quadrature,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Keys accepted by make_experiment_plan for an id.
std::vector<std::string> experiment_keys(const std::string& id);

}  // namespace bipot
