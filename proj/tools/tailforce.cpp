// tailforce: reactive-thrust estimation, force-trace analysis and sensor
// design from the command line.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "tailforce/commands.hpp"

namespace {

using tailforce::io::KeyValueFile;

KeyValueFile config_or_empty(const std::string& path) {
  return path.empty() ? KeyValueFile::parse("", "<defaults>") : KeyValueFile::load(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailforce - undulatory thrust model, force-trace analysis, sensor design"};
  app.require_subcommand(1);

  tailforce::cli::RunOptions opt;
  std::string out_dir = ".";
  std::string config;
  std::string input;
  std::string filter_config;
  std::vector<std::string> results;

  auto common = [&](CLI::App* sub, bool with_config) {
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", opt.seed, "Random seed");
    sub->add_option("--n-cycles", opt.n_cycles, "Steady-state cycles per test")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--report-propulsive", opt.report_propulsive,
                  "Report thrust as -F_th (positive = propulsive)");
    if (with_config) sub->add_option("--config", config, "key = value config file");
  };

  auto* simulate = app.add_subcommand("simulate", "Thrust from synthetic wave kinematics");
  common(simulate, true);

  auto* estimate = app.add_subcommand("estimate", "Thrust from a centerline CSV (v_t = 0)");
  common(estimate, true);
  estimate->add_option("--input", input, "Centerline CSV (frame,time_s,s_m,x_m,y_m)")
      ->required();

  auto* analyze = app.add_subcommand("analyze", "Filter and score a measured voltage trace");
  common(analyze, false);
  analyze->add_option("--config", config, "Experiment manifest")->required();
  analyze->add_option("--filters", filter_config, "Optional FIR overrides (key = value)");

  auto* sensor = app.add_subcommand("sensor", "Force-sensor design report");
  common(sensor, true);

  auto* calibrate = app.add_subcommand("calibrate", "Fit a static calibration");
  common(calibrate, false);
  calibrate->add_option("--input", input, "Calibration CSV (force_N,rep,voltage_V)")
      ->required();

  auto* sweep = app.add_subcommand("sweep", "Aggregate results tables over the f-DC grid");
  common(sweep, false);
  sweep->add_option("results", results, "Results tables to merge")->required();

  CLI11_PARSE(app, argc, argv);
  opt.out_dir = out_dir;

  try {
    namespace cli = tailforce::cli;
    if (simulate->parsed()) {
      std::cout << cli::cmd_simulate(config_or_empty(config), opt).summary;
    } else if (estimate->parsed()) {
      const bool beside = !estimate->count("--out");
      const auto o = cli::cmd_estimate(input, config_or_empty(config), opt, beside);
      for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "wrote " << o.trace_path.string() << "\n" << o.summary;
    } else if (analyze->parsed()) {
      const auto filters = cli::filters_from(config_or_empty(filter_config));
      std::cout << cli::cmd_analyze(config, filters, opt).summary;
    } else if (sensor->parsed()) {
      std::cout << cli::cmd_sensor(config_or_empty(config), opt).report;
    } else if (calibrate->parsed()) {
      std::cout << cli::cmd_calibrate(input, opt).summary;
    } else if (sweep->parsed()) {
      std::vector<std::filesystem::path> paths(results.begin(), results.end());
      std::cout << cli::cmd_sweep(paths, opt).summary;
    }
  } catch (const tailforce::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
