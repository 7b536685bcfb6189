#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "bipot/funcfam.hpp"
#include "bipot/kernel.hpp"
#include "bipot/numerics.hpp"

namespace bipot {

struct QuadratureSpec {
  // Excludes |y| < inner_cutoff; 0 requests the untruncated integral.
  double inner_cutoff = 0.0;
  double outer_radius = 20.0;
  // Nodes across [split_radius, outer_radius]; 0 picks a per-dimension default.
  int radial_nodes = 0;
  // Nodes per circle (n = 2) or per polar angle range (n = 3).
  int angular_nodes = 256;
  // Below this radius panels are dyadic in log r.
  double split_radius = 0.1;

  void validate() const;
  int effective_radial_nodes(int n) const;
};

enum class KernelKind { Bessel, Riesz };

struct BilinearEvalResult {
  double value = 0.0;
  // True when the untruncated integral was classified as divergent; value is
  // then the lower bound truncated at cutoff_used.
  bool diverged = false;
  double cutoff_used = 0.0;
  TailVerdict tail = TailVerdict::Inconclusive;
};

// Shared interpolation table for the default kernel spec.
std::shared_ptr<const KernelTable> shared_kernel_table(const PotentialParams& params);

// Evaluates J_s(f, g)(x) = int G(y) f(x - y) g(x + y) dy and the linear
// potential.  Radial quadrature in |y| with dyadic panels near the origin;
// n = 2 integrates the angle on a full circle; n = 3 requires radial f, g.
class PotentialEvaluator {
 public:
  PotentialEvaluator(PotentialParams params, QuadratureSpec spec = {},
                     KernelKind kind = KernelKind::Bessel);

  const PotentialParams& params() const { return params_; }
  const QuadratureSpec& spec() const { return spec_; }
  KernelKind kind() const { return kind_; }
  double kernel(double r) const;

  BilinearEvalResult bilinear(const AnalyticFunction& f, const AnalyticFunction& g,
                              const Point& x) const;
  BilinearEvalResult bilinear(const AnalyticFunction& f, const AnalyticFunction& g,
                              const Point& x, double inner_cutoff) const;

  // Integrals truncated at each cutoff (any order, all positive).
  std::vector<double> truncated(const AnalyticFunction& f, const AnalyticFunction& g,
                                const Point& x, std::span<const double> cutoffs) const;

  double linear(const AnalyticFunction& f, const Point& x) const;

  // int_{|y| < 2^{-k}} f(x - y) g(x + y) dy.
  double dyadic_piece(int k, const AnalyticFunction& f, const AnalyticFunction& g,
                      const Point& x) const;

  std::vector<BilinearEvalResult> batch(const AnalyticFunction& f, const AnalyticFunction& g,
                                        std::span<const Point> points, int jobs = 1) const;

 private:
  PotentialParams params_;
  QuadratureSpec spec_;
  KernelKind kind_;
  std::shared_ptr<const KernelTable> table_;
};

BilinearEvalResult bilinear_bessel(const AnalyticFunction& f, const AnalyticFunction& g,
                                   const Point& x, const PotentialParams& params,
                                   const QuadratureSpec& spec = {});
BilinearEvalResult bilinear_riesz(const AnalyticFunction& f, const AnalyticFunction& g,
                                  const Point& x, const PotentialParams& params,
                                  const QuadratureSpec& spec = {});
double linear_bessel(const AnalyticFunction& f, const Point& x, const PotentialParams& params,
                     const QuadratureSpec& spec = {});

// a_k = 2^{k(n-s)} for k >= 0 and e^{-2^{-k}/4} for k < 0.
double dyadic_weight(int k, const PotentialParams& params);
double dyadic_piece(int k, const AnalyticFunction& f, const AnalyticFunction& g, const Point& x,
                    const PotentialParams& params, const QuadratureSpec& spec = {});

std::vector<BilinearEvalResult> bilinear_batch(const AnalyticFunction& f,
                                               const AnalyticFunction& g,
                                               std::span<const Point> points,
                                               const PotentialParams& params,
                                               const QuadratureSpec& spec = {}, int jobs = 1);

// Columns: x (or x0,x1[,x2]), value, diverged, cutoff_used.
void write_batch_csv(std::ostream& out, int n, std::span<const Point> points,
                     std::span<const BilinearEvalResult> results);

}  // namespace bipot
