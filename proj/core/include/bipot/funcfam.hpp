#pragma once

#include <array>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace bipot {

// A point of R^n, n <= 3.
struct Point {
  int dim = 1;
  std::array<double, 3> x{};

  Point() = default;
  explicit Point(double x0) : dim(1), x{x0, 0.0, 0.0} {}
  Point(std::initializer_list<double> coords);
  static Point origin(int n);

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  double norm() const;
};

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(double c, const Point& a);

class AnalyticFunction;

// 1 on the open ball B(center, radius).
struct Indicator {
  Point center;
  double radius = 1.0;
};

// |x|^{-power_exp} log(e/|x|)^{-log_exp} on |x| < support_radius <= 1.
struct PowerLog {
  double power_exp = 0.0;
  double log_exp = 0.0;
  double support_radius = 1.0;
};

// lambda^{norm_exp} base(lambda x).
struct Dilate {
  std::shared_ptr<const AnalyticFunction> base;
  double lambda = 1.0;
  double norm_exp = 0.0;
};

// Normalised indicator of B(0, epsilon).
struct Mollifier {
  double epsilon = 1.0;
};

struct Constant {
  double value = 1.0;
};

// 1 on |x| <= inner, C^2 quintic taper to 0 at |x| = outer.
struct SmoothBump {
  double inner = 0.5;
  double outer = 1.0;
};

// Sphere of non-smoothness of a function; singular marks a blow-up point.
struct Feature {
  Point center;
  double radius = 0.0;
  bool singular = false;
};

class AnalyticFunction {
 public:
  using Variant = std::variant<Indicator, PowerLog, Dilate, Mollifier, Constant, SmoothBump>;

  AnalyticFunction(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, AnalyticFunction> &&
             !std::is_same_v<std::decay_t<T>, Variant> && std::is_constructible_v<Variant, T>)
  AnalyticFunction(T&& alt)  // NOLINT(google-explicit-constructor)
      : AnalyticFunction(Variant(std::forward<T>(alt))) {}

  static AnalyticFunction indicator(double radius);
  static AnalyticFunction indicator(double radius, Point center);
  static AnalyticFunction power_log(double a, double b, double support_radius = 1.0);
  static AnalyticFunction dilate(const AnalyticFunction& base, double lambda, double norm_exp);
  static AnalyticFunction mollifier(double epsilon);
  static AnalyticFunction constant(double value);
  static AnalyticFunction smooth_bump(double inner, double outer);

  const Variant& variant() const { return v_; }

  // The dimension is taken from x.dim.
  double operator()(const Point& x) const;

  bool is_radial() const;
  // Profile phi with f(x) = phi(|x|); requires is_radial().
  double radial(double r, int n) const;

  // Radius of a ball about the origin containing the support; +inf if none.
  double support_radius() const;
  bool bounded() const;
  double sup_norm(int n) const;
  bool singular_at_origin() const;

  // Nonsmooth spheres in absolute coordinates.
  std::vector<Feature> features() const;

  // Tagged text form, e.g. "dilate(lambda=2,norm_exp=0.5,base=smooth_bump(inner=0.5,outer=1))".
  std::string encode() const;
  static AnalyticFunction decode(std::string_view text);

 private:
  void validate() const;
  Variant v_;
};

double eval(const AnalyticFunction& f, const Point& x);

// ||f||_{L^p(R^n)} for p in (0, inf]; returns +inf when the norm is infinite.
double lp_norm_analytic(const AnalyticFunction& f, int n, double p);

}  // namespace bipot
