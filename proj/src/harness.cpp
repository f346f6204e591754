#include "etsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "etsim/analytics.hpp"
#include "etsim/triggering.hpp"

namespace etsim::harness {

namespace {

constexpr std::pair<Command, std::string_view> kCommandNames[] = {
    {Command::ratio_sweep, "ratio-sweep"},     {Command::exit_moments, "exit-moments"},
    {Command::validate_renewal, "validate-renewal"}, {Command::gumbel_check, "gumbel-check"},
    {Command::scaling_check, "scaling-check"}, {Command::closed_forms, "closed-forms"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  text = trim(text);
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw ConfigError("invalid value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "off" || text == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

double combined(double a, double b) { return std::hypot(a, b); }

/// Standard error of a/b for two estimates treated as independent.
double ratio_stderr(double a, double se_a, double b, double se_b) {
  return std::fabs(a / b) * std::hypot(se_a / a, se_b / b);
}

ExecutionOptions execution(const ExperimentConfig& c) {
  ExecutionOptions e;
  e.workers = c.workers;
  e.bridge_correction = c.bridge_correction;
  e.isa = c.isa;
  return e;
}

nlohmann::json moments_json(const MomentStats& m) {
  return {{"mean", m.mean},         {"mean_stderr", m.mean_stderr},         {"second_moment", m.second_moment},
          {"variance", m.variance}, {"variance_stderr", m.variance_stderr}, {"n_samples", m.n_samples}};
}

nlohmann::json estimate_json(const CostEstimate& e) {
  return {{"estimator", estimator_name(e.estimator)}, {"j", e.j}, {"stderr", e.std_error},
          {"failed_runs", e.failed_runs}, {"valid", e.valid}};
}

void note_failures(ValidationReport& report, std::uint64_t failed, bool valid) {
  report.failed_runs += failed;
  if (!valid) report.excessive_failures = true;
}

std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<std::uint32_t> default_agents() {
  std::vector<std::uint32_t> n;
  for (std::uint32_t k = 2; k <= 72; k += 10) n.push_back(k);
  return n;
}

Command parse_command(std::string_view name) {
  for (const auto& [command, text] : kCommandNames) {
    if (text == name) return command;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view command_name(Command command) noexcept {
  for (const auto& [c, text] : kCommandNames) {
    if (c == command) return text;
  }
  return "unknown";
}

std::vector<std::uint32_t> parse_agent_list(std::string_view text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    out.push_back(parse_number<std::uint32_t>("agents", item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "command") c.command = parse_command(value);
  else if (key == "agents") c.agents = parse_agent_list(value);
  else if (key == "runs") c.runs = parse_number<std::uint64_t>(key, value);
  else if (key == "dt") c.dt = parse_number<double>(key, value);
  else if (key == "delta") c.delta = parse_number<double>(key, value);
  else if (key == "period") c.period = parse_number<double>(key, value);
  else if (key == "horizon") c.horizon = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "out") c.out = std::string(value);
  else if (key == "format") {
    if (value == "csv") c.format = OutputFormat::csv;
    else if (value == "json") c.format = OutputFormat::json;
    else throw ConfigError("format must be csv or json, got '" + std::string(value) + "'");
  } else if (key == "workers") c.workers = parse_number<unsigned>(key, value);
  else if (key == "bridge-correction") c.bridge_correction = parse_bool(key, value);
  else if (key == "max-steps") c.max_steps = parse_number<std::uint64_t>(key, value);
  else if (key == "isa") {
    try {
      c.isa = kernel::parse_isa(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("unknown setting '" + std::string(key) + "'");
  }
}

void apply_config_text(ExperimentConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  apply_config_text(config, buffer.str());
}

void validate(const ExperimentConfig& c) {
  if (c.runs < 2) throw ConfigError("runs must be >= 2");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("dt must be finite and > 0");
  if (!(c.delta > 0.0) || !std::isfinite(c.delta)) throw ConfigError("delta must be finite and > 0");
  if (c.period && (!(*c.period > 0.0) || !std::isfinite(*c.period))) throw ConfigError("period must be finite and > 0");
  if (c.horizon && (!(*c.horizon > 0.0) || !std::isfinite(*c.horizon))) throw ConfigError("horizon must be finite and > 0");
  if (c.max_steps == 0 || c.max_steps > kernel::kMaxKernelSteps) throw ConfigError("max-steps out of range");
  if (c.agents.empty()) throw ConfigError("agent list is empty");
  const bool needs_pairs = c.command == Command::ratio_sweep || c.command == Command::gumbel_check ||
                           c.command == Command::validate_renewal || c.command == Command::scaling_check;
  for (auto n : c.agents) {
    if (n == 0) throw ConfigError("agent counts must be >= 1");
    if (needs_pairs && n < 2)
      throw ConfigError(std::string(command_name(c.command)) + " requires agent counts >= 2");
  }
  if (c.isa && !kernel::isa_available(*c.isa))
    throw ConfigError("ISA " + std::string(kernel::isa_name(*c.isa)) + " is not available on this machine");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"command", command_name(c.command)},
                      {"agents", c.agents},
                      {"runs", c.runs},
                      {"dt", c.dt},
                      {"delta", c.delta},
                      {"seed", c.seed},
                      {"bridge_correction", c.bridge_correction},
                      {"max_steps", c.max_steps}};
  j["period"] = c.period ? nlohmann::json(*c.period) : nlohmann::json(nullptr);
  j["horizon"] = c.horizon ? nlohmann::json(*c.horizon) : nlohmann::json(nullptr);
  return j;
}

RatioRow make_ratio_row(const FirstIntervalEstimate& e, double delta) {
  RatioRow row;
  const auto& t = e.stopping_time;
  const auto& q = e.q_pair;
  row.n_agents = e.pair.config.n_agents;
  row.runs = e.pair.config.runs;
  row.dt = e.pair.config.dt;
  row.delta = delta;
  row.mean_t = t.mean;
  row.stderr_t = t.mean_stderr;
  row.var_t = t.variance;
  row.j_et = e.pair.j;
  row.stderr_j_et = e.pair.std_error;
  row.j_tt = analytics::closed_form_jtt(row.n_agents, t.mean);
  row.ratio = row.j_et / row.j_tt;

  // delta method for 2 mean(q) / (N (N - 1) mean(T)^2)
  const auto n = static_cast<double>(t.n_samples);
  const double bessel = n / (n - 1.0);
  const double v_qq = q.variance * bessel;
  const double v_tt = t.variance * bessel;
  const double rel2 = (v_qq / (q.mean * q.mean) - 4.0 * e.cov_q_pair_t / (q.mean * t.mean) +
                       4.0 * v_tt / (t.mean * t.mean)) / n;
  row.stderr_ratio = row.ratio * std::sqrt(std::max(rel2, 0.0));
  row.failed_runs = e.pair.failed_runs;
  row.valid = e.pair.valid;
  return row;
}

std::vector<RatioRow> run_ratio_sweep(const ExperimentConfig& config) {
  validate(config);
  const SimGrid grid(config.dt, config.max_steps);
  const TriggerScheme scheme(EventTriggered{config.delta});
  std::vector<RatioRow> rows;
  rows.reserve(config.agents.size());
  for (const auto n : config.agents) {
    const auto est = estimate_cost_first_interval(n, scheme, grid, config.runs, config.seed, execution(config));
    rows.push_back(make_ratio_row(est, config.delta));
  }
  return rows;
}

std::optional<std::uint32_t> first_crossing(const std::vector<RatioRow>& rows) {
  for (const auto& r : rows) {
    if (r.ratio > 1.0) return r.n_agents;
  }
  return std::nullopt;
}

bool ValidationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Check agreement(std::string name, std::uint32_t n_agents, double measured, double expected, double std_error,
                double sigmas) {
  const double tol = sigmas * std_error;
  return {std::move(name), n_agents, measured, expected, tol, std::fabs(measured - expected) <= tol};
}

namespace {

void exit_moments_suite(const ExperimentConfig& c, ValidationReport& report) {
  const SimGrid grid(c.dt, c.max_steps);
  const auto agents = sorted_unique(c.agents);
  double previous_mean = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto n = agents[i];
    const auto samples = exit_time_samples(n, c.delta, grid, c.runs, c.seed, execution(c));
    if (samples.times.size() < 2) throw StepBudgetExceeded(grid.max_steps(), samples.failed_runs);
    note_failures(report, samples.failed_runs,
                  static_cast<double>(samples.failed_runs) <= kMaxFailedFraction * static_cast<double>(c.runs));
    const auto m = moment_stats(samples.times);
    const auto exact = analytics::exact_min_exit_moments(n, c.delta);

    nlohmann::json row = {{"n_agents", n}, {"stopping_time", moments_json(m)}, {"failed_runs", samples.failed_runs},
                          {"exact_mean", exact.mean}, {"exact_variance", exact.variance}};
    if (n >= 2) {
      const auto a = analytics::asymptotic_moments(n);
      row["leading_mean"] = a.e_tet_leading;
      row["leading_variance"] = a.var_tet_leading;
    }
    report.details["rows"].push_back(row);

    const double d2 = c.delta * c.delta;
    if (n == 1) {
      report.checks.push_back(agreement("mean-exit-time", n, m.mean, d2, m.mean_stderr));
      report.checks.push_back(agreement("variance-exit-time", n, m.variance, 2.0 / 3.0 * d2 * d2, m.variance_stderr));
    }
    if (i > 0) {
      report.checks.push_back({"mean-decreases-in-n", n, m.mean, previous_mean, 0.0, m.mean < previous_mean});
    }
    previous_mean = m.mean;
  }
}

void renewal_suite(const ExperimentConfig& c, ValidationReport& report) {
  const SimGrid grid(c.dt, c.max_steps);
  const double horizon = c.horizon.value_or(1000.0);
  for (const auto n : c.agents) {
    const TriggerScheme et(EventTriggered{c.delta});
    const auto first_et = estimate_cost_first_interval(n, et, grid, c.runs, c.seed, execution(c));
    const auto long_et = estimate_cost_longrun_detail(n, et, grid, horizon, c.seed, execution(c));
    note_failures(report, first_et.pair.failed_runs, first_et.pair.valid);

    const double period = c.period.value_or(first_et.stopping_time.mean);
    const TriggerScheme tt(TimeTriggered{period});
    const auto first_tt = estimate_cost_first_interval(n, tt, grid, c.runs, c.seed, execution(c));
    const auto long_tt = estimate_cost_longrun_detail(n, tt, grid, horizon, c.seed, execution(c));
    const double closed = analytics::closed_form_jtt(n, period);

    const auto& fe = first_et.pair;
    const auto& le = long_et.estimate;
    report.checks.push_back(agreement("renewal-et", n, le.j, fe.j, combined(le.std_error, fe.std_error)));
    report.checks.push_back(agreement("renewal-tt", n, long_tt.estimate.j, first_tt.pair.j,
                                      combined(long_tt.estimate.std_error, first_tt.pair.std_error)));
    report.checks.push_back(agreement("pair-vs-single-et", n, first_et.single.j, fe.j,
                                      combined(first_et.single.std_error, fe.std_error)));
    report.checks.push_back(agreement("tt-closed-form", n, first_tt.pair.j, closed, first_tt.pair.std_error));

    report.details["rows"].push_back({{"n_agents", n},
                                      {"period", period},
                                      {"horizon", horizon},
                                      {"et_first_interval", estimate_json(fe)},
                                      {"et_single_agent", estimate_json(first_et.single)},
                                      {"et_long_run", estimate_json(le)},
                                      {"et_long_run_intervals", long_et.intervals},
                                      {"tt_first_interval", estimate_json(first_tt.pair)},
                                      {"tt_long_run", estimate_json(long_tt.estimate)},
                                      {"tt_closed_form", closed}});
  }
}

void gumbel_suite(const ExperimentConfig& c, ValidationReport& report) {
  const SimGrid grid(c.dt, c.max_steps);
  constexpr std::uint32_t kBaseline = 10;
  auto agents = c.agents;
  agents.push_back(kBaseline);
  agents = sorted_unique(std::move(agents));

  struct Row {
    std::uint32_t n;
    MomentStats m;
    double ks;
  };
  std::vector<Row> rows;
  for (const auto n : agents) {
    const auto samples = exit_time_samples(n, c.delta, grid, c.runs, c.seed, execution(c));
    note_failures(report, samples.failed_runs,
                  static_cast<double>(samples.failed_runs) <= kMaxFailedFraction * static_cast<double>(c.runs));
    std::vector<double> unit(samples.times.size());
    // the limit law is stated for a unit threshold
    const double d2 = c.delta * c.delta;
    std::transform(samples.times.begin(), samples.times.end(), unit.begin(), [d2](double t) { return t / d2; });
    const auto m = moment_stats(unit);
    const double ks = analytics::gumbel_fit_distance(unit, n);
    rows.push_back({n, m, ks});

    const double ln = std::log(static_cast<double>(n));
    const double refined = analytics::refined_mean_exit_time(n);
    report.details["rows"].push_back({{"n_agents", n},
                                      {"stopping_time", moments_json(m)},
                                      {"ks_distance", ks},
                                      {"mean_times_2lnN", m.mean * 2.0 * ln},
                                      {"variance_scaled", m.variance * std::pow(ln, 4) / (std::numbers::pi * std::numbers::pi / 24.0)},
                                      {"a_n", analytics::centering_a_n(n)},
                                      {"refined_mean", refined},
                                      {"centering_gap_in_stderr", (m.mean - refined) / m.mean_stderr}});
    if (n == 100 || n == 1000) {
      report.checks.push_back(agreement("refined-centering", n, m.mean, refined, m.mean_stderr, 4.0));
    }
  }

  const double baseline = std::find_if(rows.begin(), rows.end(), [](const Row& r) { return r.n == kBaseline; })->ks;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.n > kBaseline) report.checks.push_back({"ks-below-n10", r.n, r.ks, baseline, 0.0, r.ks < baseline});
    if (i == 0) continue;
    const auto& p = rows[i - 1];
    const double ln_r = std::log(static_cast<double>(r.n));
    const double ln_p = std::log(static_cast<double>(p.n));
    const double gap_r = std::fabs(r.m.mean * 2.0 * ln_r - 1.0);
    const double gap_p = std::fabs(p.m.mean * 2.0 * ln_p - 1.0);
    report.checks.push_back({"mean-trend-to-one", r.n, gap_r, gap_p, 0.0, gap_r < gap_p});
    const double v = std::numbers::pi * std::numbers::pi / 24.0;
    const double vgap_r = std::fabs(r.m.variance * std::pow(ln_r, 4) / v - 1.0);
    const double vgap_p = std::fabs(p.m.variance * std::pow(ln_p, 4) / v - 1.0);
    report.checks.push_back({"variance-trend-to-one", r.n, vgap_r, vgap_p, 0.0, vgap_r < vgap_p});
  }
}

void scaling_suite(const ExperimentConfig& c, ValidationReport& report) {
  const double delta = c.delta;
  const SimGrid base_grid(c.dt, c.max_steps);
  const SimGrid scaled_grid(c.dt * delta * delta, c.max_steps);
  const double d2 = delta * delta;
  const double d4 = d2 * d2;
  for (const auto n : c.agents) {
    const auto base = estimate_cost_first_interval(n, TriggerScheme(EventTriggered{1.0}), base_grid, c.runs, c.seed,
                                                   execution(c));
    const auto scaled = estimate_cost_first_interval(n, TriggerScheme(EventTriggered{delta}), scaled_grid, c.runs,
                                                     c.seed, execution(c));
    note_failures(report, base.pair.failed_runs, base.pair.valid);
    note_failures(report, scaled.pair.failed_runs, scaled.pair.valid);

    const auto& tb = base.stopping_time;
    const auto& ts = scaled.stopping_time;
    const double mean_ratio = ts.mean / tb.mean;
    const double var_ratio = ts.variance / tb.variance;
    const double q_ratio = scaled.q_pair.mean / base.q_pair.mean;
    report.checks.push_back(agreement("mean-ratio", n, mean_ratio, d2,
                                      ratio_stderr(ts.mean, ts.mean_stderr, tb.mean, tb.mean_stderr)));
    report.checks.push_back(agreement("variance-ratio", n, var_ratio, d4,
                                      ratio_stderr(ts.variance, ts.variance_stderr, tb.variance, tb.variance_stderr)));
    report.checks.push_back(agreement("cost-integral-ratio", n, q_ratio, d4,
                                      ratio_stderr(scaled.q_pair.mean, scaled.q_pair.mean_stderr, base.q_pair.mean,
                                                   base.q_pair.mean_stderr)));
    const auto row_b = make_ratio_row(base, 1.0);
    const auto row_s = make_ratio_row(scaled, delta);
    report.checks.push_back(agreement("cost-ratio-invariance", n, row_s.ratio, row_b.ratio,
                                      combined(row_s.stderr_ratio, row_b.stderr_ratio)));
    report.details["rows"].push_back({{"n_agents", n},
                                      {"delta", delta},
                                      {"mean_ratio", mean_ratio},
                                      {"variance_ratio", var_ratio},
                                      {"cost_integral_ratio", q_ratio},
                                      {"cost_ratio_delta", row_s.ratio},
                                      {"cost_ratio_unit", row_b.ratio}});
  }
}

void closed_forms_suite(const ExperimentConfig& c, ValidationReport& report) {
  const SimGrid grid(c.dt, c.max_steps);
  const double period = c.period.value_or(0.1);
  for (const auto n : c.agents) {
    const double closed = analytics::closed_form_jtt(n, period);
    const auto sim = estimate_cost_first_interval(n, TriggerScheme(TimeTriggered{period}), grid, c.runs, c.seed,
                                                  execution(c));
    report.checks.push_back(agreement("tt-closed-form", n, sim.pair.j, closed, sim.pair.std_error));
    nlohmann::json row = {{"n_agents", n}, {"period", period}, {"j_tt_closed_form", closed},
                          {"j_tt_simulated", estimate_json(sim.pair)}};
    if (n >= 2) {
      const auto a = analytics::asymptotic_moments(n);
      const auto exact = analytics::exact_min_exit_moments(n, 1.0);
      row["a_n"] = a.a_n;
      row["c_n"] = a.c_n;
      row["e_tet_leading"] = a.e_tet_leading;
      row["var_tet_leading"] = a.var_tet_leading;
      row["j_leading"] = a.j_leading;
      row["refined_mean"] = analytics::refined_mean_exit_time(n);
      row["exact_mean_exit_time"] = exact.mean;
      row["exact_variance_exit_time"] = exact.variance;
    }
    report.details["rows"].push_back(row);
  }
}

}  // namespace

ValidationReport run_validation(const ExperimentConfig& config) {
  validate(config);
  ValidationReport report;
  report.command = config.command;
  report.details["rows"] = nlohmann::json::array();
  switch (config.command) {
    case Command::ratio_sweep: throw ConfigError("ratio-sweep is not a validation command");
    case Command::exit_moments: exit_moments_suite(config, report); break;
    case Command::validate_renewal: renewal_suite(config, report); break;
    case Command::gumbel_check: gumbel_suite(config, report); break;
    case Command::scaling_check: scaling_suite(config, report); break;
    case Command::closed_forms: closed_forms_suite(config, report); break;
  }
  return report;
}

}  // namespace etsim::harness
