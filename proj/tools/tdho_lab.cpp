// Command-line front end for scenario runs, parameter sweeps and phase-matrix dumps.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdho/harness/commands.hpp"

int main(int argc, char** argv) {
  namespace h = tdho::harness;

  CLI::App app{"Time-dependent oscillator invariant laboratory"};
  app.require_subcommand(1);
  std::string output_dir;
  app.add_option("--output-dir", output_dir,
                 std::string("Directory for reports and series (default: $") + h::kOutputDirEnv + " or " +
                     h::kDefaultOutputDir + ")");

  std::string file;
  auto* run = app.add_subcommand("run", "Run a scenario and write the CSV series and JSON report");
  run->add_option("file", file, "Scenario file")->required();

  auto* check = app.add_subcommand("check", "Run a scenario and write only the JSON report");
  check->add_option("file", file, "Scenario file")->required();

  std::vector<std::string> grid;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep->add_option("file", file, "Scenario template")->required();
  sweep->add_option("--grid", grid, "path=v1,v2,... (repeatable; Cartesian product)");

  std::size_t dim = 0;
  std::string norm = "pi";
  std::string out_path;
  auto* phase = app.add_subcommand("phase-matrix", "Dump the phase operator matrix as CSV");
  phase->add_option("--dim", dim, "Fock dimension")->required();
  phase->add_option("--norm", norm, "pi (include 1/pi) or none");
  phase->add_option("--out", out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitConfig;
  }

  if (*run) return h::cmd_run(file, output_dir, true, std::cout, std::cerr);
  if (*check) return h::cmd_run(file, output_dir, false, std::cout, std::cerr);
  if (*sweep) return h::cmd_sweep(file, grid, output_dir, std::cout, std::cerr);
  return h::cmd_phase_matrix(dim, norm, out_path, std::cout, std::cerr);
}
