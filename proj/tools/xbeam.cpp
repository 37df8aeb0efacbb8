// Command-line front end: `xbeam run <config> --out <dir>` and `xbeam validate <config>`.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xbeam/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"xbeam: exact vs paraxial beam propagation scenarios"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Scenarios run concurrently (does not change results)")
      ->check(CLI::PositiveNumber);

  std::string run_config, out_dir;
  auto* run = app.add_subcommand("run", "Execute every scenario of a config");
  run->add_option("config", run_config, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Schema-check a config without running it");
  validate->add_option("config", validate_config, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : xbeam::scenario::exit_schema;
  }

  if (*run) return xbeam::scenario::run_command(run_config, out_dir, threads, std::cout, std::cerr);

  try {
    const auto diags = xbeam::scenario::validate_file(validate_config);
    for (const auto& d : diags) std::cout << xbeam::scenario::to_string(d) << '\n';
    if (diags.empty()) std::cout << "ok\n";
    return diags.empty() ? 0 : xbeam::scenario::exit_schema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return xbeam::scenario::exit_runtime;
  }
}
