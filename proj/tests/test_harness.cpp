#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "etsim/harness.hpp"

using namespace etsim;
using namespace etsim::harness;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "etsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("etsim_test_" + name);
}

}  // namespace

TEST_CASE("defaults") {
  const ExperimentConfig c;
  CHECK(c.agents == std::vector<std::uint32_t>{2, 12, 22, 32, 42, 52, 62, 72});
  CHECK(c.runs == 10'000);
  CHECK(c.dt == 1e-4);
  CHECK(c.delta == 1.0);
  CHECK(c.seed == 0);
  CHECK(c.workers == 1);
  CHECK(c.format == OutputFormat::csv);
  CHECK_FALSE(c.bridge_correction);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("command names round-trip") {
  for (const auto cmd : {Command::ratio_sweep, Command::exit_moments, Command::validate_renewal, Command::gumbel_check,
                         Command::scaling_check, Command::closed_forms})
    CHECK(parse_command(command_name(cmd)) == cmd);
  CHECK_THROWS_AS((void)parse_command("sweep"), ConfigError);
}

TEST_CASE("agent lists") {
  CHECK(parse_agent_list("2") == std::vector<std::uint32_t>{2});
  CHECK(parse_agent_list(" 2, 12 ,72") == std::vector<std::uint32_t>{2, 12, 72});
  CHECK_THROWS_AS((void)parse_agent_list("2,,3"), ConfigError);
  CHECK_THROWS_AS((void)parse_agent_list("2,x"), ConfigError);
  CHECK_THROWS_AS((void)parse_agent_list("-1"), ConfigError);
}

TEST_CASE("config text") {
  ExperimentConfig c;
  apply_config_text(c, "# sweep settings\ncommand = gumbel-check\nagents = 10, 100\n\nruns=500  # small\n"
                       "dt = 2e-4\ndelta = 0.5\nperiod = 0.25\nhorizon = 300\nseed = 9\nformat = json\n"
                       "workers = 2\nbridge-correction = true\nmax-steps = 5000\nisa = scalar\n");
  CHECK(c.command == Command::gumbel_check);
  CHECK(c.agents == std::vector<std::uint32_t>{10, 100});
  CHECK(c.runs == 500);
  CHECK(c.dt == 2e-4);
  CHECK(c.delta == 0.5);
  CHECK(c.period == 0.25);
  CHECK(c.horizon == 300.0);
  CHECK(c.seed == 9);
  CHECK(c.format == OutputFormat::json);
  CHECK(c.workers == 2);
  CHECK(c.bridge_correction);
  CHECK(c.max_steps == 5000);
  CHECK(c.isa == kernel::Isa::scalar);

  try {
    apply_config_text(c, "runs = 5\n\nnot a setting\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_text(c, "colour = blue\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "runs = many\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "dt = 1e-3x\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "format = xml\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "bridge-correction = maybe\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_text(c, "isa = neon\n"), ConfigError);
  CHECK_THROWS_AS(apply_config_file(c, "/nonexistent/etsim.cfg"), ConfigError);
}

TEST_CASE("validation of settings") {
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.runs = 1; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.dt = 0.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.dt = NAN; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.delta = -1.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.period = 0.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.horizon = -5.0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.max_steps = 0; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.agents.clear(); })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.agents = {0}; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) { c.agents = {1, 2}; })), ConfigError);
  CHECK_THROWS_AS(validate(bad([](ExperimentConfig& c) {
                    c.command = Command::gumbel_check;
                    c.agents = {1};
                  })),
                  ConfigError);
  CHECK_NOTHROW(validate(bad([](ExperimentConfig& c) {
    c.command = Command::exit_moments;
    c.agents = {1};
  })));
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-4) == "0.0001");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1.0 / 3.0) == "0.333333333");
  CHECK(format_double(123456789012.0) == "1.23456789e+11");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("ratio rows") {
  FirstIntervalEstimate e;
  e.pair.j = 0.3;
  e.pair.std_error = 0.01;
  e.pair.config.n_agents = 2;
  e.pair.config.runs = 100;
  e.pair.config.dt = 1e-3;
  e.stopping_time.mean = 0.6;
  e.stopping_time.mean_stderr = 0.02;
  e.stopping_time.variance = 0.17;
  e.stopping_time.n_samples = 100;
  e.q_pair.mean = 0.18;
  e.q_pair.variance = 0.01;
  e.cov_q_pair_t = 0.02;
  const auto row = make_ratio_row(e, 1.0);
  CHECK(row.n_agents == 2);
  CHECK(row.j_tt == doctest::Approx(0.6));
  CHECK(row.ratio == doctest::Approx(0.5));
  // ratio 2 q / (N (N-1) T^2); Bessel-corrected variances, n = 100
  const double b = 100.0 / 99.0;
  const double rel2 = (0.01 * b / (0.18 * 0.18) - 4.0 * 0.02 / (0.18 * 0.6) + 4.0 * 0.17 * b / 0.36) / 100.0;
  CHECK(row.stderr_ratio == doctest::Approx(0.5 * std::sqrt(rel2)));

  std::vector<RatioRow> rows(3);
  rows[0].n_agents = 2;
  rows[0].ratio = 0.5;
  rows[1].n_agents = 12;
  rows[1].ratio = 1.2;
  rows[2].n_agents = 22;
  rows[2].ratio = 1.5;
  CHECK(first_crossing(rows) == 12u);
  rows[1].ratio = 0.9;
  CHECK(first_crossing(rows) == 22u);
  rows[2].ratio = 1.0;
  CHECK_FALSE(first_crossing(rows).has_value());

  std::ostringstream csv;
  write_ratio_csv(csv, rows);
  const std::string text = csv.str();
  CHECK(text.substr(0, kRatioCsvHeader.size()) == kRatioCsvHeader);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("small sweep reproduces the frozen table") {
  const auto path = std::filesystem::path(ETSIM_GOLDEN_DIR) / "ratio_small.csv";
  const auto r = cli({"ratio-sweep", "--agents", "2,12", "--runs", "200", "--dt", "1e-3", "--seed", "0"});
  CHECK(r.code == kExitOk);
  CHECK(r.out == read_file(path));
  CHECK(r.err.find("first N with ratio > 1") != std::string::npos);
}

TEST_CASE("sweep output is identical across worker counts, kernels and sinks") {
  const std::vector<std::string> base = {"ratio-sweep", "--agents", "2,5,17", "--runs", "300", "--dt", "1e-3"};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return cli(a);
  };
  const auto one = with({"--workers", "1"});
  const auto four = with({"--workers", "4"});
  const auto scalar = with({"--isa", "scalar", "--workers", "3"});
  REQUIRE(one.code == kExitOk);
  CHECK(one.out == four.out);
  CHECK(one.out == scalar.out);

  const auto file = temp_path("sweep.csv");
  const auto to_file = with({"--out", file.string()});
  CHECK(to_file.code == kExitOk);
  CHECK(to_file.out.empty());
  CHECK(read_file(file) == one.out);
  std::filesystem::remove(file);

  const auto js = with({"--format", "json"});
  REQUIRE(js.code == kExitOk);
  const auto doc = nlohmann::json::parse(js.out);
  CHECK(doc["config"]["runs"] == 300);
  CHECK(doc["config"]["seed"] == 0);
  CHECK(doc["rows"].size() == 3);
  CHECK(doc["rows"][0]["n_agents"] == 2);
  CHECK(doc["rows"][0].contains("stderr_ratio"));
  CHECK(doc.contains("first_crossing"));
}

TEST_CASE("config file with flag overrides") {
  const auto cfg = temp_path("sweep.cfg");
  {
    std::ofstream f(cfg);
    f << "command = ratio-sweep\nagents = 2,12\nruns = 200\ndt = 1e-3\nseed = 5\n";
  }
  const auto from_file = cli({"--config", cfg.string()});
  const auto overridden = cli({"--config", cfg.string(), "--seed", "0"});
  const auto flags = cli({"ratio-sweep", "--agents", "2,12", "--runs", "200", "--dt", "1e-3", "--seed", "0"});
  CHECK(from_file.code == kExitOk);
  CHECK(overridden.out == flags.out);
  CHECK(from_file.out != flags.out);
  std::filesystem::remove(cfg);
}

TEST_CASE("command-line errors") {
  CHECK(cli({"ratio-sweep", "--runs", "abc"}).code == kExitConfigError);
  CHECK(cli({"ratio-sweep", "--no-such-flag"}).code == kExitConfigError);
  CHECK(cli({"bogus"}).code == kExitConfigError);
  CHECK(cli({"ratio-sweep", "--agents", "1"}).code == kExitConfigError);
  CHECK(cli({"--config", "/nonexistent/etsim.cfg"}).code == kExitConfigError);
  CHECK(cli({"ratio-sweep", "--dt", "-1"}).code == kExitConfigError);
  const auto help = cli({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("--bridge-correction") != std::string::npos);
}

TEST_CASE("unreachable thresholds are reported as failed runs") {
  const auto r = cli({"ratio-sweep", "--agents", "2", "--runs", "20", "--dt", "1e-2", "--delta", "30", "--max-steps",
                      "50"});
  CHECK(r.code == kExitTooManyFailedRuns);
}

TEST_CASE("validation report structure") {
  ExperimentConfig c;
  c.command = Command::exit_moments;
  c.agents = {1, 3};
  c.runs = 400;
  c.dt = 1e-3;
  const auto rep = run_validation(c);
  CHECK(rep.command == Command::exit_moments);
  REQUIRE_FALSE(rep.checks.empty());
  for (const auto& chk : rep.checks) {
    CHECK_FALSE(chk.name.empty());
    CHECK(std::isfinite(chk.measured));
    CHECK(chk.tolerance >= 0.0);
  }
  std::ostringstream csv;
  write_checks_csv(csv, rep);
  CHECK(csv.str().rfind("check,n_agents,measured,expected,tolerance,passed\n", 0) == 0);
  const auto js = report_json(c, rep);
  CHECK(js["config"]["command"] == "exit-moments");
  CHECK(js["checks"].size() == rep.checks.size());
  CHECK(js.contains("passed"));

  c.command = Command::ratio_sweep;
  CHECK_THROWS_AS((void)run_validation(c), ConfigError);

  const auto ok = agreement("x", 2, 1.0, 1.1, 0.05);
  CHECK(ok.passed);
  CHECK(ok.tolerance == doctest::Approx(0.15));
  CHECK_FALSE(agreement("x", 2, 1.0, 1.2, 0.05).passed);
}
