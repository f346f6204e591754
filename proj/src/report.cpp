#include <charconv>
#include <cmath>
#include <ostream>

#include "etsim/harness.hpp"

namespace etsim::harness {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

void write_ratio_csv(std::ostream& os, const std::vector<RatioRow>& rows) {
  os << kRatioCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.n_agents << ',' << r.runs << ',' << format_double(r.dt) << ',' << format_double(r.delta) << ','
       << format_double(r.mean_t) << ',' << format_double(r.stderr_t) << ',' << format_double(r.var_t) << ','
       << format_double(r.j_et) << ',' << format_double(r.stderr_j_et) << ',' << format_double(r.j_tt) << ','
       << format_double(r.ratio) << ',' << format_double(r.stderr_ratio) << ',' << r.failed_runs << '\n';
  }
}

nlohmann::json ratio_json(const ExperimentConfig& config, const std::vector<RatioRow>& rows) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"n_agents", r.n_agents},   {"runs", r.runs},
                         {"dt", r.dt},               {"delta", r.delta},
                         {"mean_T", r.mean_t},       {"stderr_T", r.stderr_t},
                         {"var_T", r.var_t},         {"J_ET", r.j_et},
                         {"stderr_J_ET", r.stderr_j_et}, {"J_TT", r.j_tt},
                         {"ratio", r.ratio},         {"stderr_ratio", r.stderr_ratio},
                         {"failed_runs", r.failed_runs}, {"valid", r.valid}});
  }
  const auto crossing = first_crossing(rows);
  j["first_crossing"] = crossing ? nlohmann::json(*crossing) : nlohmann::json(nullptr);
  return j;
}

void write_checks_csv(std::ostream& os, const ValidationReport& report) {
  os << "check,n_agents,measured,expected,tolerance,passed\n";
  for (const auto& c : report.checks) {
    os << c.name << ',' << c.n_agents << ',' << format_double(c.measured) << ',' << format_double(c.expected) << ','
       << format_double(c.tolerance) << ',' << (c.passed ? "true" : "false") << '\n';
  }
}

nlohmann::json report_json(const ExperimentConfig& config, const ValidationReport& report) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["passed"] = report.passed();
  j["failed_runs"] = report.failed_runs;
  j["excessive_failures"] = report.excessive_failures;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"check", c.name},
                           {"n_agents", c.n_agents},
                           {"measured", c.measured},
                           {"expected", c.expected},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed}});
  }
  j["details"] = report.details;
  return j;
}

}  // namespace etsim::harness
