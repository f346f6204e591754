#pragma once

// Experiment configuration and orchestration behind the command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "etsim/estimators.hpp"
#include "etsim/kernel.hpp"

namespace etsim::harness {

enum class Command : std::uint8_t { ratio_sweep, exit_moments, validate_renewal, gumbel_check, scaling_check, closed_forms };
enum class OutputFormat : std::uint8_t { csv, json };

/// Malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitValidationFailed = 3;
inline constexpr int kExitTooManyFailedRuns = 4;

[[nodiscard]] std::vector<std::uint32_t> default_agents();

struct ExperimentConfig {
  Command command = Command::ratio_sweep;
  std::vector<std::uint32_t> agents = default_agents();
  std::uint64_t runs = 10'000;
  double dt = 1e-4;
  double delta = 1.0;
  std::optional<double> period;   // explicit time-triggered period
  std::optional<double> horizon;  // long-run horizon in seconds
  std::uint64_t seed = 0;
  std::string out;                // empty: standard output
  OutputFormat format = OutputFormat::csv;
  unsigned workers = 1;
  bool bridge_correction = false;
  std::optional<kernel::Isa> isa;
  std::uint64_t max_steps = 10'000'000;
};

[[nodiscard]] Command parse_command(std::string_view name);
[[nodiscard]] std::string_view command_name(Command command) noexcept;

/// "2,12,22" style list. Throws ConfigError.
[[nodiscard]] std::vector<std::uint32_t> parse_agent_list(std::string_view text);

/// Applies one `key = value` setting; keys are the long flag names without
/// the leading dashes. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Applies a whole key-value text: one setting per line, `#` starts a
/// comment, blank lines are ignored.
void apply_config_text(ExperimentConfig& config, std::string_view text);

void apply_config_file(ExperimentConfig& config, const std::string& path);

/// Throws ConfigError when an invariant of the chosen command is violated.
void validate(const ExperimentConfig& config);

[[nodiscard]] nlohmann::json config_to_json(const ExperimentConfig& config);

struct RatioRow {
  std::uint32_t n_agents = 0;
  std::uint64_t runs = 0;
  double dt = 0.0;
  double delta = 0.0;
  double mean_t = 0.0;
  double stderr_t = 0.0;
  double var_t = 0.0;
  double j_et = 0.0;
  double stderr_j_et = 0.0;
  double j_tt = 0.0;  // closed form at period mean_t
  double ratio = 0.0;
  double stderr_ratio = 0.0;
  std::uint64_t failed_runs = 0;
  bool valid = true;
};

[[nodiscard]] RatioRow make_ratio_row(const FirstIntervalEstimate& estimate, double delta);
[[nodiscard]] std::vector<RatioRow> run_ratio_sweep(const ExperimentConfig& config);

/// First N of the table whose ratio exceeds one.
[[nodiscard]] std::optional<std::uint32_t> first_crossing(const std::vector<RatioRow>& rows);

struct Check {
  std::string name;
  std::uint32_t n_agents = 0;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationReport {
  Command command = Command::exit_moments;
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();
  std::uint64_t failed_runs = 0;
  bool excessive_failures = false;

  [[nodiscard]] bool passed() const noexcept;
};

/// Runs the property suite of a validation command (every command except
/// ratio-sweep). Throws ConfigError for ratio-sweep.
[[nodiscard]] ValidationReport run_validation(const ExperimentConfig& config);

/// Absolute agreement check |measured - expected| <= sigmas * stderr.
[[nodiscard]] Check agreement(std::string name, std::uint32_t n_agents, double measured, double expected,
                              double std_error, double sigmas = 3.0);

void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows);
[[nodiscard]] nlohmann::json ratio_json(const ExperimentConfig& config, const std::vector<RatioRow>& rows);
void write_checks_csv(std::ostream& os, const ValidationReport& report);
[[nodiscard]] nlohmann::json report_json(const ExperimentConfig& config, const ValidationReport& report);

/// 9 significant digits, '.' separator, independent of the global locale.
[[nodiscard]] std::string format_double(double value);

inline constexpr std::string_view kRatioCsvHeader =
    "n_agents,runs,dt,delta,mean_T,stderr_T,var_T,J_ET,stderr_J_ET,J_TT,ratio,stderr_ratio,failed_runs";

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace etsim::harness
