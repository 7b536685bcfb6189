#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "bipot/error.hpp"
#include "bipot/numerics.hpp"
#include "bipot/verify.hpp"

namespace bipot {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json numbers(const std::vector<double>& values) {
  ordered_json arr = ordered_json::array();
  for (double v : values) arr.push_back(number(v));
  return arr;
}

bool compare(double value, const std::string& relation, double threshold) {
  if (std::isnan(value)) return false;
  if (relation == "<=") return value <= threshold;
  if (relation == ">=") return value >= threshold;
  if (relation == "<") return value < threshold;
  if (relation == ">") return value > threshold;
  throw DomainError("unknown check relation '" + relation + "'");
}

ordered_json to_json_object(const ExperimentReport& r) {
  ordered_json j;
  j["experiment_id"] = r.experiment_id;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  j["config"] = config;
  j["parameter_name"] = r.parameter_name;
  j["parameter_sequence"] = numbers(r.parameter_sequence);
  j["measured_name"] = r.measured_name;
  j["measured"] = numbers(r.measured);
  ordered_json series = ordered_json::object();
  for (const auto& [k, v] : r.series) series[k] = numbers(v);
  j["series"] = series;
  j["fit_rule"] = to_string(r.fit_rule);
  j["fit_model"] = r.fit_model;
  const bool has_fit = r.fit_rule != FitRule::None;
  j["fit_slope"] = has_fit ? number(r.fit_slope) : ordered_json(nullptr);
  j["fit_intercept"] = has_fit ? number(r.fit_intercept) : ordered_json(nullptr);
  j["r_squared"] = has_fit ? number(r.r_squared) : ordered_json(nullptr);
  j["expected_slope"] =
      r.fit_rule == FitRule::SlopeMatch ? number(r.expected_slope) : ordered_json(nullptr);
  j["tolerance"] = r.fit_rule == FitRule::SlopeMatch ? number(r.tolerance) : ordered_json(nullptr);
  j["min_r_squared"] = has_fit ? number(r.min_r_squared) : ordered_json(nullptr);
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["value"] = number(c.value);
    cj["relation"] = c.relation;
    cj["threshold"] = number(c.threshold);
    cj["passed"] = c.passed;
    cj["gating"] = c.gating;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["notes"] = r.notes;
  j["verdict"] = r.verdict ? "pass" : "fail";
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const char* to_string(FitRule rule) {
  switch (rule) {
    case FitRule::None: return "none";
    case FitRule::SlopeMatch: return "slope_match";
    case FitRule::PositiveSlope: return "positive_slope";
  }
  return "none";
}

void ExperimentReport::add_check(std::string name, double value, std::string relation,
                                 double threshold, bool gating) {
  ReportCheck c;
  c.passed = compare(value, relation, threshold);
  c.name = std::move(name);
  c.value = value;
  c.relation = std::move(relation);
  c.threshold = threshold;
  c.gating = gating;
  checks.push_back(std::move(c));
}

void ExperimentReport::add_flag(std::string name, bool ok, bool gating) {
  add_check(std::move(name), ok ? 1.0 : 0.0, ">=", 1.0, gating);
}

void ExperimentReport::fit(const std::vector<double>& fit_x, const std::vector<double>& fit_y) {
  const LinearFit f = fit_line(fit_x, fit_y);
  fit_slope = f.slope;
  fit_intercept = f.intercept;
  r_squared = f.r_squared;
}

bool ExperimentReport::fit_passed() const {
  switch (fit_rule) {
    case FitRule::None: return true;
    case FitRule::SlopeMatch:
      return std::abs(fit_slope - expected_slope) <= tolerance && r_squared >= min_r_squared;
    case FitRule::PositiveSlope: return fit_slope > 0.0 && r_squared >= min_r_squared;
  }
  return false;
}

void ExperimentReport::finalize() {
  bool ok = fit_passed();
  for (const auto& c : checks)
    if (c.gating && !c.passed) ok = false;
  verdict = ok;
}

std::string report_to_json(const ExperimentReport& report) {
  return to_json_object(report).dump(2) + "\n";
}

std::string reports_to_json(const std::vector<ExperimentReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json_object(r));
  ordered_json root;
  root["reports"] = arr;
  return root.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "experiment_id,index,parameter_name,parameter,measured_name,measured,"
         "fit_slope,fit_intercept,r_squared,expected_slope,tolerance,verdict\n";
  for (const auto& r : reports) {
    const bool has_fit = r.fit_rule != FitRule::None;
    const bool match = r.fit_rule == FitRule::SlopeMatch;
    const std::string fit = (has_fit ? format_number(r.fit_slope) : "") + "," +
                            (has_fit ? format_number(r.fit_intercept) : "") + "," +
                            (has_fit ? format_number(r.r_squared) : "") + "," +
                            (match ? format_number(r.expected_slope) : "") + "," +
                            (match ? format_number(r.tolerance) : "");
    const std::size_t rows = std::max(r.parameter_sequence.size(), r.measured.size());
    for (std::size_t i = 0; i < rows; ++i) {
      out << csv_field(r.experiment_id) << ',' << i << ',' << csv_field(r.parameter_name) << ','
          << (i < r.parameter_sequence.size() ? format_number(r.parameter_sequence[i]) : "")
          << ',' << csv_field(r.measured_name) << ','
          << (i < r.measured.size() ? format_number(r.measured[i]) : "") << ',' << fit << ','
          << (r.verdict ? "pass" : "fail") << '\n';
    }
  }
  return out.str();
}

std::string report_to_table(const ExperimentReport& r) {
  std::ostringstream out;
  out << "experiment " << r.experiment_id << ": " << (r.verdict ? "PASS" : "FAIL") << '\n';
  for (const auto& [k, v] : r.config) out << "  config " << k << " = " << v << '\n';
  out << "  " << r.parameter_name << " | " << r.measured_name << '\n';
  for (std::size_t i = 0; i < r.parameter_sequence.size() && i < r.measured.size(); ++i)
    out << "    " << format_number(r.parameter_sequence[i]) << " | "
        << format_number(r.measured[i]) << '\n';
  if (r.fit_rule != FitRule::None) {
    out << "  fit " << r.fit_model << ": slope " << format_number(r.fit_slope) << ", intercept "
        << format_number(r.fit_intercept) << ", R^2 " << format_number(r.r_squared);
    if (r.fit_rule == FitRule::SlopeMatch)
      out << ", expected " << format_number(r.expected_slope) << " +- "
          << format_number(r.tolerance);
    else
      out << ", slope must be positive";
    out << ", R^2 floor " << format_number(r.min_r_squared) << '\n';
  }
  for (const auto& c : r.checks)
    out << "  check " << c.name << ": " << format_number(c.value) << ' ' << c.relation << ' '
        << format_number(c.threshold) << (c.passed ? " ok" : " FAILED")
        << (c.gating ? "" : " (diagnostic)") << '\n';
  for (const auto& n : r.notes) out << "  note: " << n << '\n';
  return out.str();
}

}  // namespace bipot
