#include "bipot/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "bipot/error.hpp"
#include "bipot/numerics.hpp"
#include "bipot/parallel.hpp"
#include "json.hpp"

namespace bipot::cli {

namespace {

namespace pt = boost::property_tree;
using ojson = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

// Line numbers of sections and keys, recovered with the same line rules as
// the INI reader so that validation messages can point into the file.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int no = 0;
    while (std::getline(ss, line)) {
      ++no;
      line = trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line[0] == '[') {
        const auto end = line.find(']');
        section = trim(line.substr(1, end == std::string::npos ? std::string::npos : end - 1));
        lines_[section + '\n'] = no;
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos) lines_[section + '\n' + trim(line.substr(0, eq))] = no;
    }
  }

  int line(const std::string& section, const std::string& key = "") const {
    auto it = lines_.find(section + '\n' + key);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  std::map<std::string, int> lines_;
};

// One config section with consumed-key tracking.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree, const LineIndex& index)
      : name_(std::move(name)), tree_(tree), index_(&index) {}

  bool present() const { return tree_ != nullptr; }
  const std::string& name() const { return name_; }

  std::string where(const std::string& key) const {
    const int line = index_->line(name_, key);
    std::string w = "[" + name_ + "] " + key;
    if (line > 0) w = "line " + std::to_string(line) + ": " + w;
    return w;
  }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return it->second.data();
  }

  std::string required(const std::string& key) {
    auto v = text(key);
    if (!v) throw DomainError("[" + name_ + "] is missing required key '" + key + "'");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    auto v = text(key);
    if (!v) return fallback;
    try {
      return parse_number(*v);
    } catch (const ParseError& e) {
      throw ParseError(where(key) + ": " + e.what());
    }
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const double v = number(key, fallback);
    if (v != std::floor(v) || v < lo || v > hi)
      throw DomainError(where(key) + " must be an integer in [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::vector<double> numbers(const std::string& key) {
    auto v = text(key);
    if (!v) return {};
    std::vector<double> out;
    for (const auto& item : split(*v, ',')) {
      try {
        out.push_back(parse_number(item));
      } catch (const ParseError& e) {
        throw ParseError(where(key) + ": " + e.what());
      }
    }
    return out;
  }

  std::vector<std::string> names(const std::string& key) {
    auto v = text(key);
    if (!v) return {};
    auto out = split(*v, ',');
    for (const auto& s : out)
      if (s.empty()) throw ParseError(where(key) + ": empty list item");
    return out;
  }

  // Every key, in file order.
  KeyValues all() const {
    KeyValues out;
    if (tree_)
      for (const auto& [k, v] : *tree_) out.emplace_back(k, v.data());
    return out;
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!used_.count(k)) {
        std::string accepted;
        for (const auto& u : used_) accepted += (accepted.empty() ? "" : ", ") + u;
        throw DomainError(where(k) + " is not a recognised key (accepted: " + accepted + ")");
      }
    }
  }

 private:
  std::string name_;
  const pt::ptree* tree_;
  const LineIndex* index_;
  std::set<std::string> used_;
};

template <class F>
auto with_context(const std::string& context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw ParseError(context + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(context + ": " + e.what());
  } catch (const Error& e) {
    throw DomainError(context + ": " + e.what());
  }
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

void check_writable(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.filename().empty()) throw DomainError("output path '" + path + "' names a directory");
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw DomainError("output directory '" + dir.string() + "' does not exist");
  if (::access(dir.c_str(), W_OK) != 0)
    throw DomainError("output directory '" + dir.string() + "' is not writable");
  if (fs::is_directory(p, ec)) throw DomainError("output path '" + path + "' is a directory");
}

std::size_t default_norm_cells(int n) {
  switch (n) {
    case 1: return 1u << 16;
    case 2: return 1024;
    default: return 128;
  }
}

std::vector<Point> parse_points(Section& sec, int n) {
  const auto raw = sec.required("points");
  std::vector<Point> points;
  for (const auto& item : split(raw, ';')) {
    if (item.empty()) throw ParseError(sec.where("points") + ": empty point");
    std::vector<double> coords;
    for (const auto& c : split(item, ',')) {
      try {
        coords.push_back(parse_number(c));
      } catch (const ParseError& e) {
        throw ParseError(sec.where("points") + ": " + e.what());
      }
    }
    if (static_cast<int>(coords.size()) != n)
      throw DomainError(sec.where("points") + ": point '" + item + "' has " +
                        std::to_string(coords.size()) + " coordinates but n = " +
                        std::to_string(n));
    for (double c : coords)
      if (!std::isfinite(c)) throw DomainError(sec.where("points") + ": coordinates must be finite");
    Point p = Point::origin(n);
    for (int i = 0; i < n; ++i) p[i] = coords[static_cast<std::size_t>(i)];
    points.push_back(p);
  }
  return points;
}

std::vector<NamedFunction> select_functions(Section& sec, const std::vector<NamedFunction>& all) {
  const auto wanted = sec.names("functions");
  if (wanted.empty()) return all;
  std::vector<NamedFunction> out;
  for (const auto& name : wanted) {
    auto it = std::find_if(all.begin(), all.end(),
                           [&](const NamedFunction& f) { return f.name == name; });
    if (it == all.end())
      throw DomainError(sec.where("functions") + ": no [function " + name + "] section");
    out.push_back(*it);
  }
  return out;
}

}  // namespace

const char* to_string(Command command) {
  switch (command) {
    case Command::Kernel: return "kernel";
    case Command::Norm: return "norm";
    case Command::Apply: return "apply";
    case Command::Experiment: return "experiment";
    case Command::Suite: return "suite";
  }
  return "?";
}

Command parse_command(const std::string& text) {
  for (Command c : {Command::Kernel, Command::Norm, Command::Apply, Command::Experiment,
                    Command::Suite})
    if (text == to_string(c)) return c;
  throw ParseError("unknown command '" + text +
                   "' (expected kernel, norm, apply, experiment or suite)");
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "structured" || text == "json") return OutputFormat::Structured;
  throw ParseError("unknown output format '" + text + "' (expected csv or structured)");
}

RunConfig parse_config(const std::string& text, Command command) {
  return parse_config(text, command, std::nullopt, std::nullopt);
}

RunConfig parse_config(const std::string& text, Command command,
                       const std::optional<std::string>& out_path,
                       const std::optional<OutputFormat>& format) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ParseError("line " + std::to_string(e.line()) + ": " + e.message());
    }
  }
  const LineIndex index(text);

  RunConfig cfg;
  cfg.command = command;

  std::map<std::string, const pt::ptree*> fixed;
  std::vector<std::pair<std::string, const pt::ptree*>> function_sections;
  std::vector<std::pair<std::string, const pt::ptree*>> experiment_sections;
  static const std::set<std::string> kFixed{"params", "quadrature", "kernel", "norm",
                                            "apply",  "experiment", "suite",  "output"};
  for (const auto& [name, child] : tree) {
    const int line = index.line(name);
    const std::string at = line > 0 ? "line " + std::to_string(line) + ": " : "";
    if (child.empty() && !child.data().empty())
      throw ParseError(at + "key '" + name + "' must belong to a section");
    if (kFixed.count(name)) {
      fixed[name] = &child;
    } else if (name.rfind("function ", 0) == 0) {
      const std::string fname = trim(name.substr(9));
      if (!valid_name(fname)) throw ParseError(at + "invalid function name '" + fname + "'");
      function_sections.emplace_back(fname, &child);
    } else if (name.rfind("experiment.", 0) == 0) {
      const std::string id = name.substr(11);
      if (!is_catalog_id(id)) throw DomainError(at + "unknown experiment id '" + id + "'");
      experiment_sections.emplace_back(id, &child);
    } else {
      throw ParseError(at + "unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    auto it = fixed.find(name);
    return Section(name, it == fixed.end() ? nullptr : it->second, index);
  };

  // [params]
  {
    Section sec = section("params");
    if (!sec.present()) throw DomainError("missing [params] section with n and s");
    const int n = sec.integer("n", 0, 1, 3);
    const double s = sec.number("s", NAN);
    if (!sec.text("s")) throw DomainError("[params] is missing required key 's'");
    sec.finish();
    cfg.params.n = n;
    cfg.params.s = s;
    with_context("[params]", [&] { cfg.params.validate(); });
  }

  // [quadrature]
  {
    Section sec = section("quadrature");
    QuadratureSpec q;
    q.inner_cutoff = sec.number("inner_cutoff", q.inner_cutoff);
    q.outer_radius = sec.number("outer_radius", q.outer_radius);
    q.radial_nodes = sec.integer("radial_nodes", q.radial_nodes, 0, 1 << 20);
    q.angular_nodes = sec.integer("angular_nodes", q.angular_nodes, 1, 1 << 16);
    q.split_radius = sec.number("split_radius", q.split_radius);
    sec.finish();
    with_context("[quadrature]", [&] { q.validate(); });
    cfg.quadrature = q;
    cfg.quadrature_given = sec.present();
  }

  // [function <name>]
  for (const auto& [name, child] : function_sections) {
    Section sec("function " + name, child, index);
    const std::string spec = sec.required("spec");
    sec.finish();
    const std::string ctx = sec.where("spec");
    AnalyticFunction f = with_context(ctx, [&] { return AnalyticFunction::decode(spec); });
    with_context(ctx, [&] { (void)f(Point::origin(cfg.params.n)); });
    cfg.functions.push_back({name, f});
  }

  // [output]
  {
    Section sec = section("output");
    if (auto p = sec.text("path")) cfg.output_path = *p;
    if (auto f = sec.text("format")) {
      cfg.output_format = with_context(sec.where("format"), [&] { return parse_format(*f); });
    }
    sec.finish();
    if (out_path) cfg.output_path = *out_path;
    if (format) cfg.output_format = *format;
    if (!cfg.output_path.empty()) check_writable(cfg.output_path);
  }

  Section kernel_sec = section("kernel");
  Section norm_sec = section("norm");
  Section apply_sec = section("apply");
  Section experiment_sec = section("experiment");
  Section suite_sec = section("suite");

  const int n = cfg.params.n;
  const std::optional<QuadratureSpec> exp_quad =
      cfg.quadrature_given ? std::optional<QuadratureSpec>(cfg.quadrature) : std::nullopt;

  switch (command) {
    case Command::Kernel: {
      if (!kernel_sec.present()) throw DomainError("kernel command needs a [kernel] section");
      cfg.kernel.radii = kernel_sec.numbers("radii");
      KernelEvalSpec& ks = cfg.kernel.spec;
      ks.subordination_nodes = kernel_sec.integer("nodes", ks.subordination_nodes, 16, 1 << 22);
      ks.t_min = kernel_sec.number("t_min", ks.t_min);
      ks.t_max = kernel_sec.number("t_max", ks.t_max);
      ks.tolerance = kernel_sec.number("tolerance", ks.tolerance);
      if (cfg.kernel.radii.empty())
        throw DomainError("[kernel] radii must list at least one radius");
      for (double r : cfg.kernel.radii)
        if (!(r >= kKernelRadiusFloor) || !std::isfinite(r))
          throw DomainError(kernel_sec.where("radii") + ": every radius must satisfy " +
                            format_number(kKernelRadiusFloor) + " <= r < inf");
      with_context("[kernel]", [&] { ks.validate(); });
      kernel_sec.finish();
      break;
    }
    case Command::Norm: {
      cfg.functions = select_functions(norm_sec, cfg.functions);
      if (cfg.functions.empty()) throw DomainError("norm command needs at least one [function]");
      const double p = norm_sec.number("p", NAN);
      if (!norm_sec.text("p")) throw DomainError("[norm] is missing required key 'p'");
      cfg.norm.index = {p, norm_sec.number("alpha", p)};
      cfg.norm.half_width = norm_sec.number("half_width", cfg.norm.half_width);
      cfg.norm.cells = static_cast<std::size_t>(
          norm_sec.integer("cells", static_cast<int>(default_norm_cells(n)), 2, 1 << 24));
      norm_sec.finish();
      with_context("[norm]", [&] { cfg.norm.index.validate(); });
      if (!(cfg.norm.half_width > 0.0) || !std::isfinite(cfg.norm.half_width))
        throw DomainError(norm_sec.where("half_width") + " must satisfy 0 < half_width < inf");
      const double total = std::pow(static_cast<double>(cfg.norm.cells), n);
      if (total > 5e7)
        throw DomainError(norm_sec.where("cells") + ": cells^n must not exceed 5e7");
      break;
    }
    case Command::Apply: {
      cfg.functions = select_functions(apply_sec, cfg.functions);
      if (cfg.functions.empty() || cfg.functions.size() > 2)
        throw DomainError("apply command needs one function (linear potential) or two "
                          "(bilinear potential); found " +
                          std::to_string(cfg.functions.size()));
      cfg.apply.points = parse_points(apply_sec, n);
      if (auto k = apply_sec.text("kernel")) {
        if (*k == "bessel") cfg.apply.kernel = KernelKind::Bessel;
        else if (*k == "riesz") cfg.apply.kernel = KernelKind::Riesz;
        else throw ParseError(apply_sec.where("kernel") + ": expected bessel or riesz");
      }
      apply_sec.finish();
      if (cfg.functions.size() == 1 && cfg.apply.kernel == KernelKind::Riesz)
        throw DomainError("the linear potential supports only the bessel kernel");
      if (n == 3)
        for (const auto& f : cfg.functions)
          if (!f.function.is_radial())
            throw DomainError("function '" + f.name + "': n = 3 requires radial functions");
      break;
    }
    case Command::Experiment:
    case Command::Suite: {
      std::vector<std::string> ids;
      KeyValues inline_overrides;
      if (command == Command::Experiment) {
        if (!experiment_sec.present())
          throw DomainError("experiment command needs an [experiment] section with an id");
        const std::string id = experiment_sec.required("id");
        if (!is_catalog_id(id))
          throw DomainError(experiment_sec.where("id") + ": unknown experiment id '" + id + "'");
        for (const auto& [k, v] : experiment_sec.all())
          if (k != "id") inline_overrides.emplace_back(k, v);
        cfg.experiment_id = id;
        ids.push_back(id);
      } else {
        if (experiment_sec.present())
          throw DomainError("[experiment] is only used by the experiment command; use "
                            "[experiment.<id>] sections for suite overrides");
        ids = suite_sec.names("ids");
        suite_sec.finish();
        if (ids.empty()) ids = catalog_ids();
        std::set<std::string> seen;
        for (const auto& id : ids) {
          if (!is_catalog_id(id))
            throw DomainError(suite_sec.where("ids") + ": unknown experiment id '" + id + "'");
          if (!seen.insert(id).second)
            throw DomainError(suite_sec.where("ids") + ": duplicate id '" + id + "'");
        }
      }
      for (const auto& id : ids) {
        KeyValues kv = inline_overrides;
        std::string ctx = command == Command::Experiment ? "[experiment]" : "";
        for (const auto& [eid, child] : experiment_sections) {
          if (eid != id) continue;
          for (const auto& [k, v] : *child) kv.emplace_back(k, v.data());
          ctx = ctx.empty() ? "[experiment." + id + "]" : ctx + " and [experiment." + id + "]";
        }
        if (ctx.empty()) ctx = "experiment " + id;
        cfg.plans.push_back(with_context(
            ctx, [&] { return make_experiment_plan(id, cfg.params, exp_quad, kv); }));
      }
      break;
    }
  }

  // Sections that the command does not read must be absent to avoid
  // silently ignored settings.
  auto unused = [&](const Section& s, bool used) {
    if (s.present() && !used)
      throw DomainError("section [" + s.name() + "] is not used by the " +
                        std::string(to_string(command)) + " command");
  };
  unused(kernel_sec, command == Command::Kernel);
  unused(norm_sec, command == Command::Norm);
  unused(apply_sec, command == Command::Apply);
  unused(suite_sec, command == Command::Suite);
  unused(experiment_sec, command == Command::Experiment);
  if (!experiment_sections.empty() && command != Command::Experiment &&
      command != Command::Suite)
    throw DomainError("[experiment.<id>] sections are not used by the " +
                      std::string(to_string(command)) + " command");
  return cfg;
}

int default_jobs() {
  if (const char* env = std::getenv("BIPOT_JOBS")) {
    try {
      const double v = parse_number(env);
      if (v >= 1 && v == std::floor(v) && v <= 1024) return static_cast<int>(v);
    } catch (const ParseError&) {
    }
    throw DomainError("BIPOT_JOBS must be an integer in [1, 1024]");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::string kernel_output(const RunConfig& config, OutputFormat format) {
  const BesselKernel kernel(config.params, config.kernel.spec);
  struct Row {
    double r, g, closed, rel;
  };
  std::vector<Row> rows;
  for (double r : config.kernel.radii) {
    const double g = kernel(r);
    const double c = bessel_kernel_closed_form(config.params, r);
    rows.push_back({r, g, c, std::abs(g - c) / std::abs(c)});
  }
  if (format == OutputFormat::Csv) {
    std::string out = "r,subordination,closed_form,relative_difference\n";
    for (const auto& row : rows)
      out += format_number(row.r) + ',' + format_number(row.g) + ',' + format_number(row.closed) +
             ',' + format_number(row.rel) + '\n';
    return out;
  }
  ojson j;
  j["command"] = "kernel";
  j["params"] = {{"n", config.params.n}, {"s", config.params.s}};
  j["rows"] = ojson::array();
  for (const auto& row : rows)
    j["rows"].push_back({{"r", row.r},
                         {"subordination", row.g},
                         {"closed_form", row.closed},
                         {"relative_difference", row.rel}});
  return j.dump(2) + "\n";
}

std::string norm_output(const RunConfig& config, OutputFormat format) {
  const int n = config.params.n;
  const LorentzIndex& idx = config.norm.index;
  const bool lebesgue = idx.p == idx.alpha;
  struct Row {
    std::string name, spec;
    LorentzNormPair pair;
    double rel;
    std::optional<double> analytic;
  };
  std::vector<Row> rows;
  for (const auto& nf : config.functions) {
    const GridFunction grid =
        GridFunction::sample(nf.function, n, config.norm.half_width, config.norm.cells);
    Row row{nf.name, nf.function.encode(), lorentz_norm_both(grid, idx), 0.0, std::nullopt};
    const double scale = std::max(std::abs(row.pair.rearrangement), std::abs(row.pair.distribution));
    row.rel = scale > 0.0 ? std::abs(row.pair.rearrangement - row.pair.distribution) / scale : 0.0;
    if (lebesgue) row.analytic = lp_norm_analytic(nf.function, n, idx.p);
    rows.push_back(row);
  }
  if (format == OutputFormat::Csv) {
    std::string out = "function,p,alpha,rearrangement,distribution,relative_difference,analytic_lp\n";
    for (const auto& r : rows)
      out += r.name + ',' + format_number(idx.p) + ',' + format_number(idx.alpha) + ',' +
             format_number(r.pair.rearrangement) + ',' + format_number(r.pair.distribution) + ',' +
             format_number(r.rel) + ',' + (r.analytic ? format_number(*r.analytic) : "") + '\n';
    return out;
  }
  ojson j;
  j["command"] = "norm";
  j["params"] = {{"n", n}, {"s", config.params.s}};
  j["index"] = {{"p", idx.p}, {"alpha", std::isinf(idx.alpha) ? ojson("inf") : ojson(idx.alpha)}};
  j["grid"] = {{"half_width", config.norm.half_width}, {"cells_per_axis", config.norm.cells}};
  j["rows"] = ojson::array();
  for (const auto& r : rows) {
    ojson row = {{"function", r.name},
                 {"spec", r.spec},
                 {"rearrangement", r.pair.rearrangement},
                 {"distribution", r.pair.distribution},
                 {"relative_difference", r.rel}};
    row["analytic_lp"] = r.analytic ? ojson(*r.analytic) : ojson(nullptr);
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

std::string apply_output(const RunConfig& config, OutputFormat format, int jobs) {
  const int n = config.params.n;
  const auto& points = config.apply.points;
  std::vector<BilinearEvalResult> results(points.size());
  const PotentialEvaluator ev(config.params, config.quadrature, config.apply.kernel);
  const bool linear = config.functions.size() == 1;
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    if (linear) {
      results[i].value = ev.linear(config.functions[0].function, points[i]);
      results[i].tail = TailVerdict::Converged;
    } else {
      results[i] = ev.bilinear(config.functions[0].function, config.functions[1].function,
                               points[i]);
    }
  });
  if (format == OutputFormat::Csv) {
    std::ostringstream out;
    write_batch_csv(out, n, points, results);
    return out.str();
  }
  ojson j;
  j["command"] = "apply";
  j["params"] = {{"n", n}, {"s", config.params.s}};
  j["mode"] = linear ? "linear" : "bilinear";
  j["kernel"] = config.apply.kernel == KernelKind::Bessel ? "bessel" : "riesz";
  j["functions"] = ojson::array();
  for (const auto& f : config.functions)
    j["functions"].push_back({{"name", f.name}, {"spec", f.function.encode()}});
  j["rows"] = ojson::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    ojson x = ojson::array();
    for (int d = 0; d < n; ++d) x.push_back(points[i][d]);
    j["rows"].push_back({{"x", x},
                         {"value", results[i].value},
                         {"diverged", results[i].diverged},
                         {"cutoff_used", results[i].cutoff_used},
                         {"tail", to_string(results[i].tail)}});
  }
  return j.dump(2) + "\n";
}

namespace {

std::string summary_line(const ExperimentReport& r, double seconds) {
  std::ostringstream line;
  line << (r.verdict ? "PASS" : "FAIL") << ' ' << r.experiment_id << "  fit=" << to_string(r.fit_rule);
  if (r.fit_rule != FitRule::None) {
    line << " slope=" << format_number(r.fit_slope);
    if (r.fit_rule == FitRule::SlopeMatch)
      line << " expected=" << format_number(r.expected_slope) << "+-"
           << format_number(r.tolerance);
    line << " r2=" << format_number(r.r_squared);
  }
  int gating = 0, passed = 0;
  std::string failed;
  for (const auto& c : r.checks) {
    if (!c.gating) continue;
    ++gating;
    if (c.passed) ++passed;
    else failed += (failed.empty() ? "" : ",") + c.name;
  }
  line << "  checks=" << passed << '/' << gating;
  if (!failed.empty()) line << " failed=" << failed;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", seconds);
  line << "  time=" << buf << 's';
  return line.str();
}

}  // namespace

int run(const RunConfig& config, const RunOptions& options, std::ostream& out,
        std::ostream& err) {
  const int jobs = std::max(1, options.jobs);
  try {
    std::string payload;
    bool all_pass = true;
    switch (config.command) {
      case Command::Kernel:
        payload = kernel_output(config, config.output_format);
        break;
      case Command::Norm:
        payload = norm_output(config, config.output_format);
        break;
      case Command::Apply:
        payload = apply_output(config, config.output_format, jobs);
        break;
      case Command::Experiment:
      case Command::Suite: {
        const auto& plans = config.plans;
        std::vector<ExperimentReport> reports(plans.size());
        std::vector<double> seconds(plans.size(), 0.0);
        std::vector<std::string> failures(plans.size());
        parallel_for(plans.size(), jobs, [&](std::size_t i) {
          const auto start = std::chrono::steady_clock::now();
          try {
            reports[i] = plans[i].run();
          } catch (const std::exception& e) {
            failures[i] = e.what();
          }
          seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                           .count();
        });
        bool errored = false;
        for (std::size_t i = 0; i < plans.size(); ++i) {
          if (!failures[i].empty()) {
            out << "ERROR " << plans[i].id << "  " << failures[i] << '\n';
            err << "error: experiment " << plans[i].id << ": " << failures[i] << '\n';
            errored = true;
            continue;
          }
          out << summary_line(reports[i], seconds[i]) << '\n';
          all_pass = all_pass && reports[i].verdict;
        }
        out.flush();
        if (errored) return 2;
        if (config.output_path.empty()) {
          for (const auto& r : reports) out << '\n' << report_to_table(r);
          return all_pass ? 0 : 1;
        }
        payload = config.output_format == OutputFormat::Csv ? reports_to_csv(reports)
                                                            : reports_to_json(reports);
        break;
      }
    }
    if (config.output_path.empty()) {
      out << payload;
    } else {
      write_atomic(config.output_path, payload);
    }
    return all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace bipot::cli
