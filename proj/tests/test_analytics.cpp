#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "etsim/analytics.hpp"

using namespace etsim::analytics;

// high-precision reference values live in tests/oracles/*.out

TEST_CASE("time-triggered closed form") {
  CHECK(closed_form_jtt(1, 0.7) == 0.0);
  CHECK(closed_form_jtt(2, 0.5) == doctest::Approx(0.5));
  CHECK(closed_form_jtt(3, 1.5) == doctest::Approx(4.5));
  CHECK(closed_form_jtt(72, 0.1) == doctest::Approx(72.0 * 71.0 * 0.05));
  CHECK_THROWS_AS((void)closed_form_jtt(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)closed_form_jtt(2, 0.0), std::invalid_argument);
}

TEST_CASE("kappa") {
  CHECK(std::fabs(kKappa - std::sqrt(2.0 / std::numbers::pi)) < 1e-15);
  CHECK(std::fabs(kKappa - 0.797884560802865355879892119869) < 1e-9);
}

TEST_CASE("centering constants against the high-precision oracle") {
  struct Row {
    double n, a_n, refined;
  };
  const Row rows[] = {{10, 0.310451671264358260854, 0.256016858214975664546},
                      {100, 0.140070707179260222253, 0.126462003916914573176},
                      {1000, 0.0885054372442762666128, 0.0824571246832337559118},
                      {10000, 0.0642038266950843394373, 0.060801650879497927168}};
  for (const auto& r : rows) {
    CAPTURE(r.n);
    CHECK(centering_a_n(r.n) == doctest::Approx(r.a_n).epsilon(1e-13));
    CHECK(refined_mean_exit_time(r.n) == doctest::Approx(r.refined).epsilon(1e-13));
  }
  CHECK(std::fabs(centering_a_n(100) - 0.140070707179260) < 1e-14);
  CHECK_THROWS_AS((void)centering_a_n(1.0), std::domain_error);
  CHECK_THROWS_AS((void)tail_prefactor_c_n(1.5), std::domain_error);
}

TEST_CASE("asymptotic report") {
  const double e2 = std::exp(2.0);
  const auto rep = asymptotic_moments(e2);
  CHECK(rep.e_tet_leading == doctest::Approx(0.25));
  CHECK(rep.e_tet2_leading == doctest::Approx(0.0625));
  CHECK(rep.var_tet_leading == doctest::Approx(std::numbers::pi * std::numbers::pi / 24.0 / 16.0));
  CHECK(rep.c_n == doctest::Approx(kKappa / 2.0));
  CHECK(rep.j_leading == doctest::Approx(e2 * (e2 - 1.0) / 8.0));
  CHECK(rep.a_n == doctest::Approx(centering_a_n(e2)));
  CHECK_THROWS_AS((void)asymptotic_moments(1.0), std::domain_error);
}

TEST_CASE("limit law helpers") {
  CHECK(gumbel_tail(0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(gumbel_tail(-50.0) == doctest::Approx(1.0));
  CHECK(gumbel_tail(5.0) < 1e-60);
  CHECK(gumbel_cdf(0.0) + gumbel_tail(0.0) == doctest::Approx(1.0));
  CHECK(gumbel_cdf(-40.0) > 0.0);
  for (const double u : {1e-12, 0.01, 0.3, 0.5, 0.9, 1.0 - 1e-9}) CHECK(gumbel_cdf(gumbel_quantile(u)) == doctest::Approx(u));
  CHECK_THROWS_AS((void)gumbel_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS((void)gumbel_quantile(1.0), std::domain_error);

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int n = 400'000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double v;
    do v = u(gen);
    while (v == 0.0);
    const double g = gumbel_quantile(v);
    s1 += g;
    s2 += g * g;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  CHECK(std::fabs(mean + kEulerGamma) < 4.0 * std::sqrt(pi2_6 / n));
  CHECK(std::fabs(var - pi2_6) < 4.0 * std::sqrt(12.0 / n));  // excess kurtosis 2.4: Var[s^2] ~ 5.4 sigma^4 / n
}

TEST_CASE("single-agent exit time CDF") {
  struct Pt {
    double w, p;
  };
  const Pt pts[] = {{0.05, 0.000015488432862088167275},
                    {0.1, 0.0031308045160050993502},
                    {0.5, 0.31455423310964801002},
                    {1.0, 0.6292225702004760946},
                    {2.0, 0.89202295555589098651}};
  for (const auto& p : pts) {
    CAPTURE(p.w);
    CHECK(exit_time_cdf_single(p.w, 1.0) == doctest::Approx(p.p).epsilon(1e-10));
    CHECK(exit_time_cdf_single_images(p.w, 1.0) == doctest::Approx(p.p).epsilon(1e-10));
  }
  // Brownian scaling: T(threshold) has the law of threshold^2 T(1)
  CHECK(exit_time_cdf_single(0.125, 0.5) == doctest::Approx(exit_time_cdf_single(0.5, 1.0)).epsilon(1e-12));
  CHECK(exit_time_cdf_single(1e-3, 1.0) < 1e-200);
  CHECK(exit_time_cdf_single(100.0, 1.0) == doctest::Approx(1.0));
  double prev = 0.0;
  for (double w = 0.02; w < 5.0; w += 0.01) {
    const double c = exit_time_cdf_single(w, 1.0);
    REQUIRE(c >= prev);
    prev = c;
  }
  CHECK_THROWS_AS((void)exit_time_cdf_single(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)exit_time_cdf_single(1.0, -1.0), std::domain_error);
}

TEST_CASE("integrated survival of the single exit time is its mean") {
  // composite Simpson on [0, 40]; the tail beyond is below 1e-40
  constexpr int m = 40'000;
  const double h = 40.0 / m;
  double acc = 1.0 + (1.0 - exit_time_cdf_single(40.0, 1.0));
  for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * (1.0 - exit_time_cdf_single(i * h, 1.0));
  CHECK(acc * h / 3.0 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact moments of the minimum exit time") {
  struct Row {
    std::uint32_t n;
    double mean, var;
  };
  const Row rows[] = {{1, 1.0, 2.0 / 3.0},
                      {2, 0.589370826252111, 0.172623169729311},
                      {10, 0.24013199466291, 0.0106331875435956},
                      {100, 0.118637102053815, 0.00081102328181303},
                      {1000, 0.0780074780538727, 0.000167970554268084}};
  for (const auto& r : rows) {
    CAPTURE(r.n);
    const auto m = exact_min_exit_moments(r.n);
    CHECK(m.mean == doctest::Approx(r.mean).epsilon(1e-9));
    CHECK(m.variance == doctest::Approx(r.var).epsilon(1e-7));
    CHECK(m.second_moment == doctest::Approx(r.var + r.mean * r.mean).epsilon(1e-9));
  }
  const auto half = exact_min_exit_moments(1, 0.5);
  CHECK(half.mean == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(min_exit_time_cdf(0.5, 1) == doctest::Approx(exit_time_cdf_single(0.5, 1.0)));
  CHECK(min_exit_time_cdf(0.5, 3) == doctest::Approx(1.0 - std::pow(1.0 - 0.31455423310964801002, 3)));
}

TEST_CASE("Kolmogorov-Smirnov distance to the limit law") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr int n = 1000, reps = 300;
  int below = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> x(n);
    for (auto& v : x) {
      double s;
      do s = u(gen);
      while (s == 0.0);
      v = gumbel_quantile(s);
    }
    if (ks_distance_to_gumbel(x) < 1.63 / std::sqrt(static_cast<double>(n))) ++below;  // 99% point
  }
  CHECK(below >= static_cast<int>(0.95 * reps));

  // every sample on one atom: the distance is the larger side of the jump
  const std::vector<double> atom(50, 0.3);
  CHECK(ks_distance_to_gumbel(atom) == doctest::Approx(std::max(gumbel_cdf(0.3), 1.0 - gumbel_cdf(0.3))));
  CHECK_THROWS_AS((void)ks_distance_to_gumbel(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS((void)gumbel_fit_distance(std::vector<double>(99, 0.1), 10), std::invalid_argument);
  CHECK_THROWS_AS((void)gumbel_fit_distance(std::vector<double>(200, 0.1), 1), std::domain_error);
}
