#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bipot/cli.hpp"
#include "bipot/error.hpp"

namespace bipot::cli {

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bilinear Bessel potential toolkit"};
  app.name("bipot");
  std::string command_text;
  std::string config_path;
  std::string out_path;
  std::string format_text;
  int jobs = 0;
  app.add_option("command", command_text, "kernel, norm, apply, experiment or suite")
      ->required()
      ->check(CLI::IsMember({"kernel", "norm", "apply", "experiment", "suite"}));
  app.add_option("--config", config_path, "Config file")->required();
  app.add_option("--out", out_path, "Output path (overrides [output] path)");
  app.add_option("--format", format_text, "Output format")
      ->check(CLI::IsMember({"csv", "structured"}));
  app.add_option("--jobs", jobs, "Worker threads (default: BIPOT_JOBS or all cores)")
      ->check(CLI::Range(1, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  RunConfig config;
  RunOptions options;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ParseError("cannot read config file '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    const std::optional<std::string> out_override =
        out_path.empty() ? std::nullopt : std::optional<std::string>(out_path);
    const std::optional<OutputFormat> format_override =
        format_text.empty() ? std::nullopt : std::optional<OutputFormat>(parse_format(format_text));
    config = parse_config(text.str(), parse_command(command_text), out_override, format_override);
    options.jobs = jobs > 0 ? jobs : default_jobs();
  } catch (const std::exception& e) {
    err << "config error: " << config_path << ": " << e.what() << '\n';
    return 2;
  }
  return run(config, options, out, err);
}

}  // namespace bipot::cli
