#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bipot/funcfam.hpp"
#include "bipot/kernel.hpp"
#include "bipot/lorentz.hpp"
#include "bipot/operator.hpp"
#include "bipot/verify.hpp"

namespace bipot::cli {

enum class Command { Kernel, Norm, Apply, Experiment, Suite };
enum class OutputFormat { Csv, Structured };

const char* to_string(Command command);
Command parse_command(const std::string& text);
OutputFormat parse_format(const std::string& text);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct NamedFunction {
  std::string name;
  AnalyticFunction function;
};

struct KernelRequest {
  std::vector<double> radii;
  KernelEvalSpec spec;
};

struct NormRequest {
  LorentzIndex index;
  double half_width = 4.0;
  // 0 picks a per-dimension default.
  std::size_t cells = 0;
};

struct ApplyRequest {
  std::vector<Point> points;
  KernelKind kernel = KernelKind::Bessel;
};

struct RunConfig {
  Command command = Command::Suite;
  PotentialParams params;
  std::vector<NamedFunction> functions;
  QuadratureSpec quadrature;
  bool quadrature_given = false;
  std::optional<std::string> experiment_id;
  KernelRequest kernel;
  NormRequest norm;
  ApplyRequest apply;
  std::string output_path;
  OutputFormat output_format = OutputFormat::Structured;
  // Validated experiment plans in catalog order (experiment and suite).
  std::vector<ExperimentPlan> plans;
};

// Parses and fully validates a config document for `command`.  Syntax
// errors raise ParseError with a line number; violated preconditions raise
// DomainError naming the relation.  No computation happens here.
RunConfig parse_config(const std::string& text, Command command);

// Same, overriding the output settings from the command line before the
// plans are built.
RunConfig parse_config(const std::string& text, Command command,
                       const std::optional<std::string>& out_path,
                       const std::optional<OutputFormat>& format);

struct RunOptions {
  int jobs = 1;
};

// Executes a validated config.  Returns 0 when every verdict passes, 1 when
// some verdict fails, 2 on an execution error.  `out` receives the summary
// (one line per experiment) and, without an output path, the results.
int run(const RunConfig& config, const RunOptions& options, std::ostream& out,
        std::ostream& err);

// Default worker count: BIPOT_JOBS when set, else the hardware concurrency.
int default_jobs();

// Writes `contents` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& contents);

// Output builders shared by run and the tests.
std::string kernel_output(const RunConfig& config, OutputFormat format);
std::string norm_output(const RunConfig& config, OutputFormat format);
std::string apply_output(const RunConfig& config, OutputFormat format, int jobs);

// Full command-line entry point: `bipot <command> --config <path> ...`.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bipot::cli
