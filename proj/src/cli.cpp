#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include <CLI11.hpp>

#include "etsim/harness.hpp"
#include "etsim/triggering.hpp"

namespace etsim::harness {

namespace {

constexpr const char* kValueFlags[] = {"agents", "runs", "dt",      "delta",  "period", "horizon",
                                       "seed",   "out",  "format",  "workers", "isa",   "max-steps"};

int emit(const ExperimentConfig& config, const std::string& body, std::ostream& out, std::ostream& err) {
  if (config.out.empty()) {
    out << body;
    return kExitOk;
  }
  std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
  file << body;
  file.close();
  if (!file) {
    err << "etsim: cannot write '" << config.out << "'\n";
    return kExitConfigError;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event- vs time-triggered consensus cost: Monte Carlo sweeps and validation suites", "etsim"};
  std::string command;
  app.add_option("command", command,
                 "ratio-sweep | exit-moments | validate-renewal | gumbel-check | scaling-check | closed-forms");
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; flags override its settings");

  std::map<std::string, std::string> values;
  for (const char* name : kValueFlags) app.add_option(std::string("--") + name, values[name]);
  app.get_option("--agents")->description("comma-separated agent counts (default 2,12,...,72)");
  app.get_option("--runs")->description("Monte Carlo runs per configuration (default 10000)");
  app.get_option("--dt")->description("grid step in seconds (default 1e-4)");
  app.get_option("--delta")->description("event threshold (default 1)");
  app.get_option("--period")->description("explicit time-triggered period");
  app.get_option("--horizon")->description("long-run horizon in seconds");
  app.get_option("--seed")->description("master seed (default 0)");
  app.get_option("--out")->description("output file (default stdout)");
  app.get_option("--format")->description("csv | json");
  app.get_option("--workers")->description("worker threads, 0 = all cores (default 1)");
  app.get_option("--isa")->description("force a kernel variant: scalar | avx2 | avx512");
  app.get_option("--max-steps")->description("step budget per interval (default 1e7)");
  bool bridge = false;
  auto* bridge_flag = app.add_flag("--bridge-correction", bridge, "Brownian-bridge crossing correction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "etsim: " << e.what() << '\n';
    return kExitConfigError;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) apply_config_file(config, config_path);
    if (!command.empty()) config.command = parse_command(command);
    for (const char* name : kValueFlags) {
      if (app.get_option(std::string("--") + name)->count() > 0) apply_setting(config, name, values[name]);
    }
    if (bridge_flag->count() > 0) config.bridge_correction = bridge;
    validate(config);
  } catch (const ConfigError& e) {
    err << "etsim: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (config.command == Command::ratio_sweep) {
      const auto rows = run_ratio_sweep(config);
      std::ostringstream body;
      if (config.format == OutputFormat::csv) write_ratio_csv(body, rows);
      else body << ratio_json(config, rows).dump(2) << '\n';
      if (const int rc = emit(config, body.str(), out, err); rc != kExitOk) return rc;
      const auto crossing = first_crossing(rows);
      err << "etsim: first N with ratio > 1: " << (crossing ? std::to_string(*crossing) : "none") << '\n';
      const bool all_valid = std::all_of(rows.begin(), rows.end(), [](const RatioRow& r) { return r.valid; });
      return all_valid ? kExitOk : kExitTooManyFailedRuns;
    }

    const auto report = run_validation(config);
    std::ostringstream body;
    if (config.format == OutputFormat::csv) write_checks_csv(body, report);
    else body << report_json(config, report).dump(2) << '\n';
    if (const int rc = emit(config, body.str(), out, err); rc != kExitOk) return rc;
    for (const auto& c : report.checks) {
      if (!c.passed) err << "etsim: FAILED " << c.name << " (N=" << c.n_agents << ")\n";
    }
    if (report.excessive_failures) return kExitTooManyFailedRuns;
    return report.passed() ? kExitOk : kExitValidationFailed;
  } catch (const StepBudgetExceeded& e) {
    err << "etsim: " << e.what() << '\n';
    return kExitTooManyFailedRuns;
  } catch (const ConfigError& e) {
    err << "etsim: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "etsim: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace etsim::harness
