#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bipot/funcfam.hpp"

namespace bipot {

// Lorentz space L^{p, alpha}; alpha = +inf selects the weak space.
struct LorentzIndex {
  double p = 1.0;
  double alpha = 1.0;

  void validate() const;
};

// Cell-centred samples on a uniform box [origin, origin + extents * spacing].
class GridFunction {
 public:
  GridFunction(int dim, Point origin, std::array<double, 3> spacing,
               std::array<std::size_t, 3> extents, std::vector<double> samples);

  // Samples f at cell centres of [-half_width, half_width]^n.
  static GridFunction sample(const AnalyticFunction& f, int n, double half_width,
                             std::size_t cells_per_axis);

  int dim() const { return dim_; }
  const Point& origin() const { return origin_; }
  const std::array<double, 3>& spacing() const { return spacing_; }
  const std::array<std::size_t, 3>& extents() const { return extents_; }
  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double cell_measure() const;
  Point cell_center(std::size_t flat_index) const;

  void write_csv(std::ostream& out) const;
  static GridFunction read_csv(std::istream& in);
  void write_binary(std::ostream& out) const;
  static GridFunction read_binary(std::istream& in);

 private:
  int dim_;
  Point origin_;
  std::array<double, 3> spacing_;
  std::array<std::size_t, 3> extents_;
  std::vector<double> samples_;
};

// Exact step distribution function d(lambda) = |{|f| > lambda}| of a grid.
class DistributionFunction {
 public:
  explicit DistributionFunction(const GridFunction& f);

  double operator()(double lambda) const;
  double support_measure() const;
  double max_value() const;
  // Smallest positive |sample|; 0 if the function vanishes.
  double min_positive() const;

 private:
  std::vector<double> values_;    // distinct |f| > 0, decreasing
  std::vector<double> measures_;  // |{|f| >= values_[i]}|
};

// f* as a right-continuous step function.
class DecreasingRearrangement {
 public:
  explicit DecreasingRearrangement(const GridFunction& f);

  double operator()(double t) const;
  double cell_measure() const { return cell_; }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  double cell_;
  std::vector<double> sorted_;  // nonzero |f| decreasing
};

DistributionFunction distribution_function(const GridFunction& f);
DecreasingRearrangement decreasing_rearrangement(const GridFunction& f);

enum class NormMethod { Rearrangement, Distribution };

struct LorentzNormPair {
  double rearrangement = 0.0;
  double distribution = 0.0;
};

// Both evaluation routes, without a consistency check.
LorentzNormPair lorentz_norm_both(const GridFunction& f, const LorentzIndex& idx);

// Requested route; throws MethodDisagreement if the two routes differ by
// more than 5% relative.
double lorentz_norm(const GridFunction& f, const LorentzIndex& idx,
                    NormMethod method = NormMethod::Rearrangement);

double weak_norm(const GridFunction& f, double p);

// ||phi(|x|) 1_{inner <= |x| < outer}||_{L^{p,alpha}(R^n)} for a profile that is
// nonnegative and nonincreasing on [inner, outer).
double lorentz_norm_truncated_radial(const std::function<double(double)>& profile, int n,
                                     const LorentzIndex& idx, double inner, double outer);

// Radial analytic function restricted to |x| >= inner_cutoff.
double lorentz_norm_truncated(const AnalyticFunction& f, int n, const LorentzIndex& idx,
                              double inner_cutoff);

}  // namespace bipot
