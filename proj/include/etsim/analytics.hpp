#pragma once

// Closed forms and asymptotics for the two triggering schemes, plus
// analytic oracles for the single-agent exit time.
//
// Sign convention for the extreme-value limit G used throughout:
//   P(G >= r) = exp(-exp(r)),  CDF(r) = 1 - exp(-exp(r)),
// i.e. G is the negative of a standard Gumbel variable. Hence
// E[G] = -gamma (Euler-Mascheroni) and Var[G] = pi^2 / 6.

#include <cstdint>
#include <numbers>
#include <span>

namespace etsim::analytics {

inline constexpr double kKappa = 0.79788456080286535588;  // sqrt(2 / pi)
inline constexpr double kEulerGamma = std::numbers::egamma;

/// Time-triggered cost N (N - 1) period / 2.
/// Throws std::invalid_argument for n_agents == 0 or period <= 0.
[[nodiscard]] double closed_form_jtt(std::uint32_t n_agents, double period);

/// Centering constant of the rescaled minimum exit time,
///   1 / (2 ln N) - ln(kappa / sqrt(2 ln N)) / (2 ln^2 N).
/// Accepts real N for testing. Throws std::domain_error for N < 2.
[[nodiscard]] double centering_a_n(double n_agents);

/// Tail prefactor kappa / sqrt(2 ln N). Throws std::domain_error for N < 2.
[[nodiscard]] double tail_prefactor_c_n(double n_agents);

/// a_N + E[G] / (2 ln^2 N) with E[G] = -gamma.
[[nodiscard]] double refined_mean_exit_time(double n_agents);

struct AsymptoticReport {
  double n_agents = 0.0;
  double a_n = 0.0;
  double c_n = 0.0;
  double e_tet_leading = 0.0;   // 1 / (2 ln N)
  double e_tet2_leading = 0.0;  // 1 / (2 ln N)^2
  double var_tet_leading = 0.0; // (pi^2 / 24) / ln^4 N
  double j_leading = 0.0;       // N (N - 1) / (4 ln N)
};

/// Throws std::domain_error for N < 2.
[[nodiscard]] AsymptoticReport asymptotic_moments(double n_agents);

[[nodiscard]] double gumbel_tail(double r) noexcept;
[[nodiscard]] double gumbel_cdf(double r) noexcept;
/// Inverse of gumbel_cdf on (0, 1).
[[nodiscard]] double gumbel_quantile(double u);

/// P(T_1 <= w) for the exit time of a standard Brownian motion from
/// (-threshold, threshold), via the alternating theta series
///   P(sup_[0,1] |B| < x) = (4/pi) sum_k (-1)^k / (2k+1) exp(-(2k+1)^2 pi^2 / (8 x^2))
/// at x = threshold / sqrt(w), truncated once a term drops below 1e-12.
/// Throws std::domain_error for non-positive arguments.
[[nodiscard]] double exit_time_cdf_single(double w, double threshold);

/// Same probability from the image (reflection) series
///   2 sum_k (-1)^k erfc((2k+1) x / sqrt 2),
/// which converges fast where the theta series converges slowly (small w).
[[nodiscard]] double exit_time_cdf_single_images(double w, double threshold);

/// Exact moments of min_j T_j over N independent agents,
///   E[T] = int_0^inf S(w)^N dw,   E[T^2] = int_0^inf 2 w S(w)^N dw,
/// with S = 1 - CDF, by adaptive Gauss-Kronrod quadrature.
struct ExactExitMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

[[nodiscard]] ExactExitMoments exact_min_exit_moments(std::uint32_t n_agents, double threshold = 1.0);

/// CDF of min_j T_j: 1 - S(w)^N.
[[nodiscard]] double min_exit_time_cdf(double w, std::uint32_t n_agents, double threshold = 1.0);

/// Kolmogorov-Smirnov distance between the empirical law of `values` and
/// gumbel_cdf. Throws std::invalid_argument for an empty input.
[[nodiscard]] double ks_distance_to_gumbel(std::span<const double> values);

/// Rescales exit-time samples to 2 ln^2 N (T - a_N) and returns their KS
/// distance to the limit law. Throws std::invalid_argument for fewer than
/// 100 samples and std::domain_error for N < 2.
[[nodiscard]] double gumbel_fit_distance(std::span<const double> exit_times, std::uint32_t n_agents);

inline constexpr std::size_t kMinGumbelSamples = 100;

}  // namespace etsim::analytics
