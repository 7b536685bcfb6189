#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "bipot/error.hpp"
#include "bipot/numerics.hpp"
#include "bipot/verify.hpp"

namespace bipot {

namespace {

double inv(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(parse_number(item));
    } catch (const ParseError& e) {
      throw ParseError("key '" + key + "': " + e.what());
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Key lookup with bookkeeping of consumed keys.
class Overrides {
 public:
  Overrides(const std::string& id, const std::vector<std::pair<std::string, std::string>>& kv)
      : id_(id) {
    for (const auto& [k, v] : kv) {
      if (!values_.emplace(k, v).second)
        throw ParseError("duplicate key '" + k + "' for experiment " + id);
    }
  }

  void number(const std::string& key, double& target) {
    allowed_.insert(key);
    if (auto it = values_.find(key); it != values_.end()) {
      try {
        target = parse_number(it->second);
      } catch (const ParseError& e) {
        throw ParseError("key '" + key + "': " + e.what());
      }
    }
  }

  void integer(const std::string& key, int& target) {
    double v = target;
    number(key, v);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw DomainError("key '" + key + "' must be an integer");
    target = static_cast<int>(v);
  }

  void seed(const std::string& key, std::uint64_t& target) {
    allowed_.insert(key);
    if (auto it = values_.find(key); it != values_.end()) {
      try {
        target = std::stoull(it->second);
      } catch (const std::exception&) {
        throw ParseError("key '" + key + "' must be a nonnegative integer");
      }
    }
  }

  void numbers(const std::string& key, std::vector<double>& target) {
    allowed_.insert(key);
    if (auto it = values_.find(key); it != values_.end()) target = parse_list(key, it->second);
  }

  std::optional<std::string> text(const std::string& key) {
    allowed_.insert(key);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    return std::nullopt;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void finish() const {
    for (const auto& [k, v] : values_) {
      if (!allowed_.count(k)) {
        std::string keys;
        for (const auto& a : allowed_) keys += (keys.empty() ? "" : ", ") + a;
        throw DomainError("unknown key '" + k + "' for experiment " + id_ + " (accepted: " +
                          keys + ")");
      }
    }
  }

  std::vector<std::string> allowed() const { return {allowed_.begin(), allowed_.end()}; }

 private:
  std::string id_;
  std::map<std::string, std::string> values_;
  std::set<std::string> allowed_;
};

template <class Args, class Runner>
ExperimentPlan finish_plan(const std::string& id, Args args, Runner runner, const Overrides& o) {
  o.finish();
  args.validate();
  ExperimentPlan plan;
  plan.id = id;
  plan.run = [args, runner] { return runner(args); };
  return plan;
}

std::vector<OneilCase> default_oneil_cases() {
  using AF = AnalyticFunction;
  const double t = 4.0 / 3.0;
  std::vector<OneilCase> cases;
  cases.push_back({"indicator_indicator", AF::indicator(1.0), AF::indicator(1.0), t, t, 2.0, t,
                   t, 2.0});
  cases.push_back({"bump_bump", AF::smooth_bump(0.5, 1.0), AF::smooth_bump(0.5, 1.0), t, t, 2.0,
                   t, t, 2.0});
  cases.push_back({"indicator_bump", AF::indicator(1.0), AF::smooth_bump(0.5, 1.0), 1.5, 1.2,
                   2.0, 1.5, 1.2, 2.0});
  cases.push_back({"power_indicator", AF::power_log(0.25, 0.0, 1.0), AF::indicator(1.0), 2.0,
                   1.5, 6.0, 2.0, 1.5, 6.0});
  cases.push_back({"mollifier_indicator", AF::mollifier(0.5), AF::indicator(2.0), 1.25, 1.25,
                   5.0 / 3.0, 1.0, 2.0, 1.0});
  cases.push_back({"indicator_zero", AF::indicator(1.0), AF::constant(0.0), t, t, 2.0, t, t,
                   2.0});
  return cases;
}

GridFunction read_grid(const std::string& path) {
  const bool binary = path.size() > 4 && path.substr(path.size() - 4) == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DomainError("cannot open grid file '" + path + "'");
  return binary ? GridFunction::read_binary(in) : GridFunction::read_csv(in);
}

ExperimentPlan build(const std::string& id, const PotentialParams& params,
                     const QuadratureSpec& quad, Overrides& o) {
  const double sigma = params.ratio();
  if (id == "scaling_upper") {
    ScalingUpperArgs a;
    a.params = params;
    a.quadrature = quad;
    double p = 2.0, q = 2.0, r = 1.0;
    o.numbers("radii", a.radii);
    o.number("p", p);
    o.number("q", q);
    o.number("r", r);
    o.integer("plateau_samples", a.plateau_samples);
    a.triple = {inv(p), inv(q), inv(r)};
    return finish_plan(id, a, run_scaling_upper, o);
  }
  if (id == "scaling_lower") {
    ScalingLowerArgs a;
    a.params = params;
    a.quadrature = quad;
    double p = 2.0, q = 2.0;
    o.numbers("lambdas", a.lambdas);
    o.number("p", p);
    o.number("q", q);
    double r = 1.0 / (inv(p) + inv(q) - sigma);
    o.number("r", r);
    o.number("off_surface_factor", a.off_surface_factor);
    o.integer("profile_samples", a.profile_samples);
    a.triple = {inv(p), inv(q), inv(r)};
    return finish_plan(id, a, run_scaling_lower, o);
  }
  if (id == "critical_divergence") {
    CriticalDivergenceArgs a;
    a.params = params;
    a.quadrature = quad;
    a.p = a.q = 2.0 / sigma;
    a.cutoffs = geometric_sequence(std::pow(2.0, -3.0), std::pow(2.0, -23.0 / 11.0), 12);
    o.number("p", a.p);
    o.number("q", a.q);
    o.number("beta", a.beta);
    o.number("gamma", a.gamma);
    o.numbers("cutoffs", a.cutoffs);
    o.number("linear_radius", a.linear_radius);
    return finish_plan(id, a, run_critical_divergence, o);
  }
  if (id == "sharpness_interior") {
    SharpnessInteriorArgs a;
    a.params = params;
    a.quadrature = quad;
    a.cutoffs = geometric_sequence(std::pow(2.0, -4.0), 0.5, 37);
    o.number("p", a.p);
    o.number("q", a.q);
    o.number("alpha", a.alpha);
    o.numbers("cutoffs", a.cutoffs);
    o.integer("radii", a.radii);
    o.number("control_gap", a.control_gap);
    return finish_plan(id, a, run_sharpness_interior, o);
  }
  if (id == "sharpness_endpoint") {
    SharpnessEndpointArgs a;
    a.params = params;
    a.quadrature = quad;
    a.cutoffs = geometric_sequence(std::pow(2.0, -10.0), 0.5, 41);
    o.number("p", a.p);
    o.number("q", a.q_endpoint);
    o.number("alpha", a.alpha);
    o.numbers("cutoffs", a.cutoffs);
    o.integer("radii", a.radii);
    return finish_plan(id, a, run_sharpness_endpoint, o);
  }
  if (id == "mollifier_blowup") {
    MollifierBlowupArgs a;
    a.params = params;
    a.quadrature = quad;
    a.epsilons = geometric_sequence(std::pow(2.0, -5.0), 0.5, 10);
    o.number("alpha", a.alpha);
    o.numbers("epsilons", a.epsilons);
    o.integer("profile_nodes", a.profile_nodes);
    return finish_plan(id, a, run_mollifier_blowup, o);
  }
  if (id == "interpolation_crossover") {
    InterpolationArgs a;
    o.number("A", a.A);
    o.number("B", a.B);
    o.number("r1", a.r1);
    o.number("r2", a.r2);
    o.number("theta", a.theta);
    o.number("alpha", a.alpha);
    o.integer("samples", a.samples);
    if (auto path = o.text("h_grid")) a.h = read_grid(*path);
    return finish_plan(id, a, run_interpolation_crossover, o);
  }
  if (id == "oneil_check") {
    OneilArgs a;
    a.cases = default_oneil_cases();
    double cells = static_cast<double>(a.cells);
    o.number("half_width", a.half_width);
    o.number("cells", cells);
    if (cells != std::floor(cells) || cells < 16 || cells > 1e6)
      throw DomainError("cells must be an integer in [16, 1e6]");
    a.cells = static_cast<std::size_t>(cells);
    return finish_plan(id, a, run_oneil_check, o);
  }
  if (id == "half_norm_uniformity") {
    HalfNormArgs a;
    a.params = params;
    a.quadrature = quad;
    a.widths = geometric_sequence(1.0, std::pow(10.0, -0.5), 7);
    o.numbers("widths", a.widths);
    o.numbers("translations", a.translations);
    o.number("translation_width", a.translation_width);
    return finish_plan(id, a, run_half_norm_uniformity, o);
  }
  if (id == "barycentric") {
    BarycentricArgs a;
    a.params = params;
    o.number("p", a.p);
    o.number("q", a.q);
    o.number("p0", a.p0);
    o.integer("draws", a.draws);
    o.seed("seed", a.seed);
    return finish_plan(id, a, run_barycentric, o);
  }
  throw DomainError("unknown experiment id '" + id + "'");
}

}  // namespace

const std::vector<std::string>& catalog_ids() {
  static const std::vector<std::string> ids{
      "scaling_upper",      "scaling_lower",           "critical_divergence",
      "sharpness_interior", "sharpness_endpoint",      "mollifier_blowup",
      "interpolation_crossover", "oneil_check",        "half_norm_uniformity",
      "barycentric"};
  return ids;
}

bool is_catalog_id(const std::string& id) {
  const auto& ids = catalog_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

ExperimentPlan make_experiment_plan(
    const std::string& id, const PotentialParams& params,
    const std::optional<QuadratureSpec>& quadrature,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  if (!is_catalog_id(id)) throw DomainError("unknown experiment id '" + id + "'");
  params.validate();
  const QuadratureSpec quad = quadrature ? *quadrature : default_experiment_quadrature(params);
  Overrides o(id, overrides);
  ExperimentPlan plan = build(id, params, quad, o);
  plan.config = overrides;
  return plan;
}

std::vector<std::string> experiment_keys(const std::string& id) {
  if (!is_catalog_id(id)) throw DomainError("unknown experiment id '" + id + "'");
  Overrides o(id, {});
  try {
    build(id, PotentialParams{1, 0.5}, default_experiment_quadrature(PotentialParams{1, 0.5}), o);
  } catch (const Error&) {
  }
  return o.allowed();
}

}  // namespace bipot
