#include "bipot/funcfam.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "bipot/error.hpp"
#include "bipot/kernel.hpp"
#include "bipot/numerics.hpp"

namespace bipot {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double taper(double t) { return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t); }

double power_log_value(const PowerLog& f, double r) {
  if (r <= 0.0) return (f.power_exp == 0.0 && f.log_exp == 0.0) ? 1.0 : 0.0;
  if (r >= f.support_radius) return 0.0;
  return std::pow(r, -f.power_exp) * std::pow(1.0 - std::log(r), -f.log_exp);
}

bool is_zero_point(const Point& p) { return p.x[0] == 0.0 && p.x[1] == 0.0 && p.x[2] == 0.0; }

}  // namespace

Point::Point(std::initializer_list<double> coords) {
  if (coords.size() < 1 || coords.size() > 3) {
    throw DomainError("points have 1 to 3 coordinates");
  }
  dim = static_cast<int>(coords.size());
  std::copy(coords.begin(), coords.end(), x.begin());
}

Point Point::origin(int n) {
  Point p;
  p.dim = n;
  return p;
}

double Point::norm() const { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

Point operator+(const Point& a, const Point& b) {
  Point out;
  out.dim = std::max(a.dim, b.dim);
  for (std::size_t i = 0; i < 3; ++i) out.x[i] = a.x[i] + b.x[i];
  return out;
}

Point operator-(const Point& a, const Point& b) {
  Point out;
  out.dim = std::max(a.dim, b.dim);
  for (std::size_t i = 0; i < 3; ++i) out.x[i] = a.x[i] - b.x[i];
  return out;
}

Point operator*(double c, const Point& a) {
  Point out = a;
  for (auto& v : out.x) v *= c;
  return out;
}

AnalyticFunction::AnalyticFunction(Variant v) : v_(std::move(v)) { validate(); }

AnalyticFunction AnalyticFunction::indicator(double radius) { return Indicator{Point{}, radius}; }

AnalyticFunction AnalyticFunction::indicator(double radius, Point center) {
  return Indicator{center, radius};
}

AnalyticFunction AnalyticFunction::power_log(double a, double b, double support_radius) {
  return PowerLog{a, b, support_radius};
}

AnalyticFunction AnalyticFunction::dilate(const AnalyticFunction& base, double lambda,
                                          double norm_exp) {
  return Dilate{std::make_shared<const AnalyticFunction>(base), lambda, norm_exp};
}

AnalyticFunction AnalyticFunction::mollifier(double epsilon) { return Mollifier{epsilon}; }

AnalyticFunction AnalyticFunction::constant(double value) { return Constant{value}; }

AnalyticFunction AnalyticFunction::smooth_bump(double inner, double outer) {
  return SmoothBump{inner, outer};
}

void AnalyticFunction::validate() const {
  std::visit(Overloaded{
                 [](const Indicator& f) {
                   if (!(f.radius > 0.0) || !std::isfinite(f.radius)) {
                     throw DomainError("indicator radius must be positive and finite");
                   }
                 },
                 [](const PowerLog& f) {
                   if (!std::isfinite(f.power_exp) || !std::isfinite(f.log_exp)) {
                     throw DomainError("power_log exponents must be finite");
                   }
                   if (!(f.support_radius > 0.0) || f.support_radius > 1.0) {
                     throw DomainError("power_log support radius must lie in (0, 1]");
                   }
                 },
                 [](const Dilate& f) {
                   if (!f.base) throw DomainError("dilate needs a base function");
                   if (!(f.lambda > 0.0) || !std::isfinite(f.lambda)) {
                     throw DomainError("dilation factor must be positive and finite");
                   }
                   if (!std::isfinite(f.norm_exp)) {
                     throw DomainError("dilation normalisation exponent must be finite");
                   }
                 },
                 [](const Mollifier& f) {
                   if (!(f.epsilon > 0.0) || !std::isfinite(f.epsilon)) {
                     throw DomainError("mollifier width must be positive and finite");
                   }
                 },
                 [](const Constant& f) {
                   if (!std::isfinite(f.value)) throw DomainError("constant must be finite");
                 },
                 [](const SmoothBump& f) {
                   if (!(f.inner >= 0.0) || !(f.outer > f.inner) || !std::isfinite(f.outer)) {
                     throw DomainError("smooth bump needs 0 <= inner < outer");
                   }
                 },
             },
             v_);
}

bool AnalyticFunction::is_radial() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) { return is_zero_point(f.center); },
                        [](const Dilate& f) { return f.base->is_radial(); },
                        [](const auto&) { return true; },
                    },
                    v_);
}

double AnalyticFunction::radial(double r, int n) const {
  return std::visit(
      Overloaded{
          [&](const Indicator& f) {
            if (!is_zero_point(f.center)) throw DomainError("indicator is not centred");
            return r < f.radius ? 1.0 : 0.0;
          },
          [&](const PowerLog& f) { return power_log_value(f, r); },
          [&](const Dilate& f) {
            return std::pow(f.lambda, f.norm_exp) * f.base->radial(f.lambda * r, n);
          },
          [&](const Mollifier& f) {
            return r < f.epsilon ? 1.0 / (unit_ball_volume(n) * std::pow(f.epsilon, n)) : 0.0;
          },
          [&](const Constant& f) { return f.value; },
          [&](const SmoothBump& f) {
            if (r <= f.inner) return 1.0;
            if (r >= f.outer) return 0.0;
            return taper((r - f.inner) / (f.outer - f.inner));
          },
      },
      v_);
}

double AnalyticFunction::operator()(const Point& x) const {
  return std::visit(Overloaded{
                        [&](const Indicator& f) {
                          return (x - f.center).norm() < f.radius ? 1.0 : 0.0;
                        },
                        [&](const Dilate& f) {
                          return std::pow(f.lambda, f.norm_exp) * (*f.base)(f.lambda * x);
                        },
                        [&](const auto&) { return radial(x.norm(), x.dim); },
                    },
                    v_);
}

double eval(const AnalyticFunction& f, const Point& x) { return f(x); }

double AnalyticFunction::support_radius() const {
  return std::visit(Overloaded{
                        [](const Indicator& f) { return f.center.norm() + f.radius; },
                        [](const PowerLog& f) { return f.support_radius; },
                        [](const Dilate& f) { return f.base->support_radius() / f.lambda; },
                        [](const Mollifier& f) { return f.epsilon; },
                        [](const Constant& f) { return f.value == 0.0 ? 0.0 : kInf; },
                        [](const SmoothBump& f) { return f.outer; },
                    },
                    v_);
}

bool AnalyticFunction::singular_at_origin() const {
  return std::visit(Overloaded{
                        [](const PowerLog& f) {
                          return f.power_exp > 0.0 || (f.power_exp == 0.0 && f.log_exp < 0.0);
                        },
                        [](const Dilate& f) { return f.base->singular_at_origin(); },
                        [](const auto&) { return false; },
                    },
                    v_);
}

bool AnalyticFunction::bounded() const { return !singular_at_origin(); }

double AnalyticFunction::sup_norm(int n) const {
  return std::visit(
      Overloaded{
          [](const Indicator&) { return 1.0; },
          [&](const PowerLog& f) {
            if (singular_at_origin()) return kInf;
            if (f.power_exp == 0.0) {
              if (f.log_exp == 0.0) return 1.0;
              return std::pow(1.0 - std::log(f.support_radius), -f.log_exp);
            }
            double best = 0.0;
            for (double r : log_spaced(1e-14 * f.support_radius,
                                       f.support_radius * (1.0 - 1e-12), 4000)) {
              best = std::max(best, power_log_value(f, r));
            }
            return best;
          },
          [&](const Dilate& f) { return std::pow(f.lambda, f.norm_exp) * f.base->sup_norm(n); },
          [&](const Mollifier& f) { return 1.0 / (unit_ball_volume(n) * std::pow(f.epsilon, n)); },
          [](const Constant& f) { return std::abs(f.value); },
          [](const SmoothBump&) { return 1.0; },
      },
      v_);
}

std::vector<Feature> AnalyticFunction::features() const {
  return std::visit(
      Overloaded{
          [](const Indicator& f) { return std::vector<Feature>{{f.center, f.radius, false}}; },
          [&](const PowerLog& f) {
            std::vector<Feature> out{{Point{}, f.support_radius, false}};
            out.push_back({Point{}, 0.0, singular_at_origin()});
            return out;
          },
          [](const Dilate& f) {
            auto out = f.base->features();
            for (auto& feat : out) {
              feat.center = (1.0 / f.lambda) * feat.center;
              feat.radius /= f.lambda;
            }
            return out;
          },
          [](const Mollifier& f) { return std::vector<Feature>{{Point{}, f.epsilon, false}}; },
          [](const Constant&) { return std::vector<Feature>{}; },
          [](const SmoothBump& f) {
            std::vector<Feature> out{{Point{}, f.outer, false}};
            if (f.inner > 0.0) out.push_back({Point{}, f.inner, false});
            return out;
          },
      },
      v_);
}

std::string AnalyticFunction::encode() const {
  auto num = [](double v) { return format_number(v); };
  return std::visit(
      Overloaded{
          [&](const Indicator& f) {
            std::string out = "indicator(radius=" + num(f.radius);
            if (!is_zero_point(f.center)) {
              out += ",center=[";
              for (int i = 0; i < f.center.dim; ++i) {
                if (i > 0) out += ",";
                out += num(f.center[i]);
              }
              out += "]";
            }
            return out + ")";
          },
          [&](const PowerLog& f) {
            return "power_log(power_exp=" + num(f.power_exp) + ",log_exp=" + num(f.log_exp) +
                   ",support_radius=" + num(f.support_radius) + ")";
          },
          [&](const Dilate& f) {
            return "dilate(lambda=" + num(f.lambda) + ",norm_exp=" + num(f.norm_exp) +
                   ",base=" + f.base->encode() + ")";
          },
          [&](const Mollifier& f) { return "mollifier(epsilon=" + num(f.epsilon) + ")"; },
          [&](const Constant& f) { return "constant(value=" + num(f.value) + ")"; },
          [&](const SmoothBump& f) {
            return "smooth_bump(inner=" + num(f.inner) + ",outer=" + num(f.outer) + ")";
          },
      },
      v_);
}

namespace {

class Decoder {
 public:
  explicit Decoder(std::string_view text) : text_(text) {}

  AnalyticFunction parse_all() {
    AnalyticFunction f = parse_function();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return f;
  }

 private:
  struct Value {
    bool is_function = false;
    std::vector<double> numbers;
    std::shared_ptr<AnalyticFunction> function;
  };

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("function encoding: " + what + " at offset " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' &&
           text_[pos_] != ']' && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return parse_number(text_.substr(start, pos_ - start));
  }

  Value value() {
    skip_space();
    Value v;
    if (consume('[')) {
      do {
        v.numbers.push_back(number());
      } while (consume(','));
      expect(']');
      return v;
    }
    if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])) &&
        text_.substr(pos_, 3) != "inf") {
      v.is_function = true;
      v.function = std::make_shared<AnalyticFunction>(parse_function());
      return v;
    }
    v.numbers.push_back(number());
    return v;
  }

  AnalyticFunction parse_function() {
    const std::string name = identifier();
    expect('(');
    std::map<std::string, Value> args;
    if (!consume(')')) {
      do {
        const std::string key = identifier();
        expect('=');
        if (args.count(key)) fail("duplicate key " + key);
        args[key] = value();
      } while (consume(','));
      expect(')');
    }
    auto scalar = [&](const std::string& key) {
      auto it = args.find(key);
      if (it == args.end()) fail(name + " needs " + key);
      if (it->second.is_function || it->second.numbers.size() != 1) {
        fail(key + " must be a number");
      }
      double v = it->second.numbers[0];
      args.erase(it);
      return v;
    };
    auto finish = [&](AnalyticFunction f) {
      if (!args.empty()) fail("unknown key " + args.begin()->first + " for " + name);
      return f;
    };
    if (name == "indicator") {
      const double radius = scalar("radius");
      Point center;
      if (auto it = args.find("center"); it != args.end()) {
        if (it->second.is_function || it->second.numbers.empty() ||
            it->second.numbers.size() > 3) {
          fail("center must list 1 to 3 coordinates");
        }
        center.dim = static_cast<int>(it->second.numbers.size());
        for (std::size_t i = 0; i < it->second.numbers.size(); ++i) {
          center.x[i] = it->second.numbers[i];
        }
        args.erase(it);
      }
      return finish(Indicator{center, radius});
    }
    if (name == "power_log") {
      const double a = scalar("power_exp");
      const double b = scalar("log_exp");
      const double rho = args.count("support_radius") ? scalar("support_radius") : 1.0;
      return finish(PowerLog{a, b, rho});
    }
    if (name == "dilate") {
      const double lambda = scalar("lambda");
      const double e = scalar("norm_exp");
      auto it = args.find("base");
      if (it == args.end() || !it->second.is_function) fail("dilate needs base=<function>");
      auto base = it->second.function;
      args.erase(it);
      return finish(Dilate{base, lambda, e});
    }
    if (name == "mollifier") return finish(Mollifier{scalar("epsilon")});
    if (name == "constant") return finish(Constant{scalar("value")});
    if (name == "smooth_bump") {
      const double inner = scalar("inner");
      const double outer = scalar("outer");
      return finish(SmoothBump{inner, outer});
    }
    fail("unknown function family " + name);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// int_{R^n} |f|^p for a radial f, by dyadic shells in log r.
double radial_power_integral(const AnalyticFunction& f, int n, double p) {
  const double outer = f.support_radius();
  std::vector<double> breaks;
  for (const Feature& feat : f.features()) {
    if (feat.radius > 0.0 && feat.radius < outer) breaks.push_back(feat.radius);
  }
  std::sort(breaks.begin(), breaks.end());
  const GaussRule& rule = gauss_rule(20);
  const double omega = unit_sphere_area(n);
  auto piece = [&](double lo, double hi) {
    return integrate_gauss(
        [&](double u) {
          const double r = std::exp(u);
          return omega * std::pow(r, n) * std::pow(std::abs(f.radial(r, n)), p);
        },
        std::log(lo), std::log(hi), rule);
  };
  constexpr int kShells = 64;
  std::vector<double> cutoffs;
  std::vector<double> partial;
  double total = 0.0;
  double hi = outer;
  for (int k = 0; k < kShells; ++k) {
    const double lo = 0.5 * hi;
    double edge = hi;
    for (auto it = breaks.rbegin(); it != breaks.rend(); ++it) {
      if (*it < edge && *it > lo) {
        total += piece(*it, edge);
        edge = *it;
      }
    }
    total += piece(lo, edge);
    cutoffs.push_back(lo);
    partial.push_back(total);
    hi = lo;
  }
  const TailAnalysis tail = classify_tail(cutoffs, partial);
  switch (tail.verdict) {
    case TailVerdict::Converged: return tail.limit;
    case TailVerdict::Diverged: return kInf;
    case TailVerdict::Inconclusive: break;
  }
  throw QuadratureError("cannot decide finiteness of the L^p integral of " + f.encode());
}

}  // namespace

AnalyticFunction AnalyticFunction::decode(std::string_view text) {
  return Decoder(text).parse_all();
}

double lp_norm_analytic(const AnalyticFunction& f, int n, double p) {
  if (n < 1 || n > 3) throw DomainError("dimension must be 1, 2 or 3");
  if (!(p > 0.0)) throw DomainError("exponent p must be positive");
  if (std::isinf(p)) return f.sup_norm(n);
  const auto& v = f.variant();
  if (const auto* c = std::get_if<Constant>(&v)) return c->value == 0.0 ? 0.0 : kInf;
  if (const auto* ind = std::get_if<Indicator>(&v)) {
    return std::pow(unit_ball_volume(n) * std::pow(ind->radius, n), 1.0 / p);
  }
  if (const auto* m = std::get_if<Mollifier>(&v)) {
    return std::pow(unit_ball_volume(n) * std::pow(m->epsilon, n), 1.0 / p - 1.0);
  }
  if (const auto* d = std::get_if<Dilate>(&v); d && !f.is_radial()) {
    return std::pow(d->lambda, d->norm_exp - n / p) * lp_norm_analytic(*d->base, n, p);
  }
  const double integral = radial_power_integral(f, n, p);
  return std::isinf(integral) ? kInf : std::pow(integral, 1.0 / p);
}

}  // namespace bipot
