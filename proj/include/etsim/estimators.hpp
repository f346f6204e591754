#pragma once

// Monte Carlo estimators for the long-run average disagreement cost and for
// stopping-time moments.
//
// Three estimators of the same cost are provided:
//   first-interval pair    mean(q_pair) / mean(T) over independent intervals
//   first-interval single  N (N - 1) mean(q_single) / mean(T)
//   long-run trajectory    time average over one renewal path on [0, M]
// The first two are ratios of means; their standard errors come from the
// delta method with the empirical covariance of numerator and denominator.
// All reductions run in run-index order with compensated summation.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "etsim/cost.hpp"
#include "etsim/kernel.hpp"
#include "etsim/sde_core.hpp"
#include "etsim/triggering.hpp"

namespace etsim {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct MomentStats {
  double mean = 0.0;
  double mean_stderr = 0.0;
  double second_moment = 0.0;
  double second_moment_stderr = 0.0;
  double variance = 0.0;         // plug-in: second_moment - mean^2
  double variance_stderr = 0.0;  // from the fourth central moment
  std::uint64_t n_samples = 0;
};

/// Throws std::invalid_argument for fewer than two samples.
[[nodiscard]] MomentStats moment_stats(std::span<const double> samples);

struct RatioEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// mean(numerator) / mean(denominator) with a delta-method standard error.
[[nodiscard]] RatioEstimate ratio_of_means(std::span<const double> numerator, std::span<const double> denominator);

/// Sample covariance of two equally long sequences.
[[nodiscard]] double sample_covariance(std::span<const double> x, std::span<const double> y);

enum class EstimatorKind : std::uint8_t { first_interval_pair, first_interval_single, long_run_trajectory };

[[nodiscard]] std::string_view estimator_name(EstimatorKind kind) noexcept;

struct ConfigFingerprint {
  std::uint32_t n_agents = 0;
  SchemeKind scheme = SchemeKind::event_triggered;
  double scheme_parameter = 0.0;  // threshold or period
  double dt = 0.0;
  std::uint64_t runs = 0;         // runs requested (0 for long-run)
  double horizon = 0.0;           // long-run only
  std::uint64_t seed = 0;
  bool bridge_correction = false;
};

/// Estimates are marked invalid when more than this fraction of runs fail.
inline constexpr double kMaxFailedFraction = 1e-3;

struct CostEstimate {
  double j = 0.0;
  double std_error = 0.0;
  EstimatorKind estimator = EstimatorKind::first_interval_pair;
  ConfigFingerprint config;
  std::uint64_t failed_runs = 0;
  bool valid = true;
};

struct ExecutionOptions {
  unsigned workers = 1;  // 0: hardware concurrency
  bool bridge_correction = false;
  std::optional<kernel::Isa> isa;
};

/// Independent intervals for runs 0..runs-1; run r uses stream (seed, r).
/// Samples of runs that exhausted the step budget are absent; the
/// remaining samples stay in run order.
struct Batch {
  std::vector<IntervalSample> samples;
  std::vector<std::uint64_t> run_index;
  std::uint64_t failed_runs = 0;
};

[[nodiscard]] Batch simulate_batch(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                   std::uint64_t runs, std::uint64_t seed, const ExecutionOptions& options = {},
                                   bool accumulate_cost = true);

struct FirstIntervalEstimate {
  CostEstimate pair;
  CostEstimate single;
  MomentStats stopping_time;
  MomentStats q_pair;
  double cov_q_pair_t = 0.0;  // sample covariance of (q_pair, T)
};

/// Both first-interval estimators from one batch. Requires runs >= 2.
/// Throws StepBudgetExceeded (carrying the failure count) if fewer than two
/// runs succeed.
[[nodiscard]] FirstIntervalEstimate estimate_cost_first_interval(std::uint32_t n_agents, const TriggerScheme& scheme,
                                                                 const SimGrid& grid, std::uint64_t runs,
                                                                 std::uint64_t seed,
                                                                 const ExecutionOptions& options = {});

/// Tag mixed into the seed for the long-run path.
inline constexpr std::uint64_t kLongRunSeedTag = 0x4c4f4e4752554eull;

struct LongRunDetail {
  CostEstimate estimate;
  std::uint64_t intervals = 0;        // completed intervals
  double partial_time = 0.0;          // length of the truncated final interval
  double mean_interval = 0.0;
};

/// Simulates resets at every trigger over [0, horizon] and returns the time
/// average of the pair cost. Interval k uses stream k under a key derived
/// from the seed. Throws std::invalid_argument if the horizon is shorter
/// than 100 mean intervals (checked after the run) or not positive, and
/// StepBudgetExceeded if one interval exceeds the grid budget.
[[nodiscard]] LongRunDetail estimate_cost_longrun_detail(std::uint32_t n_agents, const TriggerScheme& scheme,
                                                         const SimGrid& grid, double horizon, std::uint64_t seed,
                                                         const ExecutionOptions& options = {});

[[nodiscard]] CostEstimate estimate_cost_longrun(std::uint32_t n_agents, const TriggerScheme& scheme,
                                                 const SimGrid& grid, double horizon, std::uint64_t seed,
                                                 const ExecutionOptions& options = {});

struct ExitTimes {
  std::vector<double> times;  // successful runs in run order
  std::uint64_t failed_runs = 0;
};

[[nodiscard]] ExitTimes exit_time_samples(std::uint32_t n_agents, double threshold, const SimGrid& grid,
                                          std::uint64_t runs, std::uint64_t seed,
                                          const ExecutionOptions& options = {});

/// Moments of the event-triggered stopping time. Requires runs >= 2.
[[nodiscard]] MomentStats estimate_exit_moments(std::uint32_t n_agents, double threshold, const SimGrid& grid,
                                                std::uint64_t runs, std::uint64_t seed,
                                                const ExecutionOptions& options = {});

}  // namespace etsim
