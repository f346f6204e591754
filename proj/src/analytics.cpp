#include "etsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace etsim::analytics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesCutoff = 1e-12;

double log_n_checked(double n_agents, const char* what) {
  if (!(n_agents >= 2.0) || !std::isfinite(n_agents))
    throw std::domain_error(std::string(what) + ": requires N >= 2");
  return std::log(n_agents);
}

double scaled_argument(double w, double threshold, const char* what) {
  if (!(w > 0.0) || !(threshold > 0.0) || std::isnan(w) || !std::isfinite(threshold))
    throw std::domain_error(std::string(what) + ": w and threshold must be > 0");
  return threshold / std::sqrt(w);
}

// P(sup |B| < x) over unit time, theta form.
double stay_probability_theta(double x) {
  if (std::isinf(x)) return 1.0;
  double sum = 0.0;
  const double c = kPi * kPi / (8.0 * x * x);
  for (int k = 0;; ++k) {
    const double m = 2.0 * k + 1.0;
    const double term = std::exp(-m * m * c) / m;
    sum += (k % 2 == 0) ? term : -term;
    if (term < kSeriesCutoff) break;
  }
  return 4.0 / kPi * sum;
}

// P(sup |B| >= x) over unit time, image form.
double exit_probability_images(double x) {
  double sum = 0.0;
  for (int k = 0;; ++k) {
    const double term = std::erfc((2.0 * k + 1.0) * x / std::numbers::sqrt2);
    sum += (k % 2 == 0) ? term : -term;
    if (term < kSeriesCutoff * std::max(sum, std::numeric_limits<double>::min()) || term == 0.0) break;
  }
  return 2.0 * sum;
}

// Survival P(T_1 > w), using whichever series is well conditioned.
double survival_single(double w, double threshold) {
  const double x = threshold / std::sqrt(w);
  if (x >= 1.0) return 1.0 - exit_probability_images(x);
  return stay_probability_theta(x);
}

}  // namespace

double closed_form_jtt(std::uint32_t n_agents, double period) {
  if (n_agents == 0) throw std::invalid_argument("closed_form_jtt: n_agents must be >= 1");
  if (!(period > 0.0) || !std::isfinite(period)) throw std::invalid_argument("closed_form_jtt: period must be > 0");
  const auto n = static_cast<double>(n_agents);
  return n * (n - 1.0) * period / 2.0;
}

double centering_a_n(double n_agents) {
  const double ln = log_n_checked(n_agents, "centering_a_n");
  return 1.0 / (2.0 * ln) - std::log(kKappa / std::sqrt(2.0 * ln)) / (2.0 * ln * ln);
}

double tail_prefactor_c_n(double n_agents) {
  const double ln = log_n_checked(n_agents, "tail_prefactor_c_n");
  return kKappa / std::sqrt(2.0 * ln);
}

double refined_mean_exit_time(double n_agents) {
  const double ln = log_n_checked(n_agents, "refined_mean_exit_time");
  return centering_a_n(n_agents) - kEulerGamma / (2.0 * ln * ln);
}

AsymptoticReport asymptotic_moments(double n_agents) {
  const double ln = log_n_checked(n_agents, "asymptotic_moments");
  AsymptoticReport r;
  r.n_agents = n_agents;
  r.a_n = centering_a_n(n_agents);
  r.c_n = tail_prefactor_c_n(n_agents);
  r.e_tet_leading = 1.0 / (2.0 * ln);
  r.e_tet2_leading = r.e_tet_leading * r.e_tet_leading;
  r.var_tet_leading = (kPi * kPi / 24.0) / (ln * ln * ln * ln);
  r.j_leading = n_agents * (n_agents - 1.0) / (4.0 * ln);
  return r;
}

double gumbel_tail(double r) noexcept { return std::exp(-std::exp(r)); }

double gumbel_cdf(double r) noexcept { return -std::expm1(-std::exp(r)); }

double gumbel_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gumbel_quantile: u must lie in (0, 1)");
  return std::log(-std::log1p(-u));
}

double exit_time_cdf_single(double w, double threshold) {
  const double x = scaled_argument(w, threshold, "exit_time_cdf_single");
  return std::clamp(1.0 - stay_probability_theta(x), 0.0, 1.0);
}

double exit_time_cdf_single_images(double w, double threshold) {
  const double x = scaled_argument(w, threshold, "exit_time_cdf_single_images");
  return std::clamp(exit_probability_images(x), 0.0, 1.0);
}

double min_exit_time_cdf(double w, std::uint32_t n_agents, double threshold) {
  if (n_agents == 0) throw std::domain_error("min_exit_time_cdf: n_agents must be >= 1");
  scaled_argument(w, threshold, "min_exit_time_cdf");
  return -std::expm1(static_cast<double>(n_agents) * std::log(survival_single(w, threshold)));
}

ExactExitMoments exact_min_exit_moments(std::uint32_t n_agents, double threshold) {
  if (n_agents == 0) throw std::domain_error("exact_min_exit_moments: n_agents must be >= 1");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw std::domain_error("exact_min_exit_moments: threshold must be > 0");
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto n = static_cast<double>(n_agents);
  // unit threshold, then scale: T(threshold) = threshold^2 T(1)
  auto survival_n = [n](double w) { return w <= 0.0 ? 1.0 : std::exp(n * std::log(survival_single(w, 1.0))); };

  // split at a point beyond the bulk so the adaptive rule sees a smooth tail
  const double split = 4.0;
  double mean = Quadrature::integrate(survival_n, 0.0, split, 20, 1e-13);
  mean += Quadrature::integrate(survival_n, split, std::numeric_limits<double>::infinity(), 20, 1e-13);
  auto second_integrand = [&](double w) { return 2.0 * w * survival_n(w); };
  double second = Quadrature::integrate(second_integrand, 0.0, split, 20, 1e-13);
  second += Quadrature::integrate(second_integrand, split, std::numeric_limits<double>::infinity(), 20, 1e-13);

  const double s2 = threshold * threshold;
  ExactExitMoments m;
  m.mean = s2 * mean;
  m.second_moment = s2 * s2 * second;
  m.variance = m.second_moment - m.mean * m.mean;
  return m;
}

double ks_distance_to_gumbel(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ks_distance_to_gumbel: no samples");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = gumbel_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double gumbel_fit_distance(std::span<const double> exit_times, std::uint32_t n_agents) {
  if (exit_times.size() < kMinGumbelSamples)
    throw std::invalid_argument("gumbel_fit_distance: at least 100 samples required");
  const double ln = log_n_checked(static_cast<double>(n_agents), "gumbel_fit_distance");
  const double a = centering_a_n(static_cast<double>(n_agents));
  const double scale = 2.0 * ln * ln;
  std::vector<double> r(exit_times.size());
  std::transform(exit_times.begin(), exit_times.end(), r.begin(), [&](double t) { return scale * (t - a); });
  return ks_distance_to_gumbel(r);
}

}  // namespace etsim::analytics
