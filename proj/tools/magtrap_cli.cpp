// magtrap: classical and quantum motion in a flux-free magnetic field region.
//
//   magtrap run <scenario-file> [--out-dir DIR] [--stride K] [--quiet]
//   magtrap preset <fig1..fig5> [--out-dir DIR] [--stride K] [--quiet]
//   magtrap validate <scenario-file>
//
// Exit status: 0 success, 1 validation error, 2 solver failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "magtrap/quantum.hpp"
#include "magtrap/scenario.hpp"

namespace {

constexpr int kValidationError = 1;
constexpr int kSolverFailure = 2;

struct CommonFlags {
  std::string out_dir;
  std::size_t stride = 0;
  bool quiet = false;

  magtrap::RunOptions options() const {
    magtrap::RunOptions o;
    if (!out_dir.empty()) o.out_dir = out_dir;
    if (stride > 0) o.stride = stride;
    o.quiet = quiet;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out-dir", flags.out_dir, "Directory for CSV and summary output");
  cmd->add_option("--stride", flags.stride, "Keep every k-th snapshot / trajectory sample")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--quiet", flags.quiet, "Suppress progress and summary on stdout/stderr");
}

int execute(const magtrap::Scenario& scenario, const CommonFlags& flags) {
  const auto summary = magtrap::run(scenario, flags.options());
  if (!flags.quiet) std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charged-particle dynamics in a flux-free radial magnetic field"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_file;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
  run_cmd->add_option("scenario", run_file, "Scenario file")->required();
  add_common(run_cmd, run_flags);

  CommonFlags preset_flags;
  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "Run a built-in figure reproduction");
  preset_cmd->add_option("name", preset_name, "fig1 .. fig5")->required();
  add_common(preset_cmd, preset_flags);

  std::string validate_file;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file without running it");
  validate_cmd->add_option("scenario", validate_file, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidationError;
  }

  try {
    if (*run_cmd) return execute(magtrap::load_scenario(run_file), run_flags);
    if (*preset_cmd) return execute(magtrap::preset(preset_name), preset_flags);
    if (*validate_cmd) {
      const auto scenario = magtrap::load_scenario(validate_file);
      std::cout << magtrap::serialize_scenario(scenario);
      return 0;
    }
  } catch (const magtrap::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
