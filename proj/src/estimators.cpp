#include "etsim/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "etsim/parallel.hpp"
#include "etsim/rng.hpp"

namespace etsim {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

namespace {

double mean_of(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

void require_samples(std::size_t n, const char* what) {
  if (n < 2) throw std::invalid_argument(std::string(what) + ": at least two samples required");
}

}  // namespace

MomentStats moment_stats(std::span<const double> samples) {
  require_samples(samples.size(), "moment_stats");
  const auto n = static_cast<double>(samples.size());
  const double mean = mean_of(samples);
  CompensatedSum c2, c4, raw2, raw2_dev;
  for (double x : samples) {
    const double d = x - mean;
    c2.add(d * d);
    c4.add(d * d * d * d);
    raw2.add(x * x);
  }
  const double second = raw2.value() / n;
  for (double x : samples) {
    const double d = x * x - second;
    raw2_dev.add(d * d);
  }
  const double m2 = c2.value() / n;
  const double m4 = c4.value() / n;

  MomentStats s;
  s.n_samples = samples.size();
  s.mean = mean;
  s.mean_stderr = std::sqrt(c2.value() / (n - 1.0) / n);
  s.second_moment = second;
  s.second_moment_stderr = std::sqrt(raw2_dev.value() / (n - 1.0) / n);
  s.variance = m2;
  s.variance_stderr = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return s;
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("sample_covariance: length mismatch");
  require_samples(x.size(), "sample_covariance");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add((x[i] - mx) * (y[i] - my));
  return s.value() / static_cast<double>(x.size() - 1);
}

RatioEstimate ratio_of_means(std::span<const double> numerator, std::span<const double> denominator) {
  if (numerator.size() != denominator.size()) throw std::invalid_argument("ratio_of_means: length mismatch");
  require_samples(numerator.size(), "ratio_of_means");
  const double mq = mean_of(numerator);
  const double mt = mean_of(denominator);
  if (!(mt != 0.0)) throw std::invalid_argument("ratio_of_means: zero denominator mean");
  const double r = mq / mt;
  const double vqq = sample_covariance(numerator, numerator);
  const double vqt = sample_covariance(numerator, denominator);
  const double vtt = sample_covariance(denominator, denominator);
  const double var = (vqq - 2.0 * r * vqt + r * r * vtt) / (static_cast<double>(numerator.size()) * mt * mt);
  return {r, std::sqrt(std::max(var, 0.0))};
}

std::string_view estimator_name(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::first_interval_pair: return "first-interval-pair";
    case EstimatorKind::first_interval_single: return "first-interval-single";
    case EstimatorKind::long_run_trajectory: return "long-run-trajectory";
  }
  return "unknown";
}

Batch simulate_batch(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid, std::uint64_t runs,
                     std::uint64_t seed, const ExecutionOptions& options, bool accumulate_cost) {
  if (n_agents == 0) throw std::invalid_argument("simulate_batch: n_agents must be >= 1");
  IntervalOptions interval;
  interval.accumulate_cost = accumulate_cost;
  interval.bridge_correction = options.bridge_correction;
  interval.isa = options.isa;

  std::vector<IntervalSample> slots(runs);
  std::vector<unsigned char> failed(runs, 0);
  parallel_for(runs, options.workers, [&](std::uint64_t r) {
    try {
      slots[r] = simulate_interval(n_agents, scheme, grid, RngStream{seed, r}, interval);
    } catch (const StepBudgetExceeded&) {
      failed[r] = 1;
    }
  });

  Batch out;
  out.samples.reserve(runs);
  out.run_index.reserve(runs);
  for (std::uint64_t r = 0; r < runs; ++r) {
    if (failed[r]) {
      ++out.failed_runs;
      continue;
    }
    out.samples.push_back(slots[r]);
    out.run_index.push_back(r);
  }
  return out;
}

namespace {

ConfigFingerprint fingerprint(std::uint32_t n, const TriggerScheme& scheme, const SimGrid& grid, std::uint64_t runs,
                              double horizon, std::uint64_t seed, const ExecutionOptions& options) {
  ConfigFingerprint f;
  f.n_agents = n;
  f.scheme = scheme.kind();
  f.scheme_parameter = scheme.parameter();
  f.dt = grid.dt();
  f.runs = runs;
  f.horizon = horizon;
  f.seed = seed;
  f.bridge_correction = options.bridge_correction && scheme.kind() == SchemeKind::event_triggered;
  return f;
}

bool within_failure_budget(std::uint64_t failed, std::uint64_t runs) {
  return static_cast<double>(failed) <= kMaxFailedFraction * static_cast<double>(runs);
}

}  // namespace

FirstIntervalEstimate estimate_cost_first_interval(std::uint32_t n_agents, const TriggerScheme& scheme,
                                                   const SimGrid& grid, std::uint64_t runs, std::uint64_t seed,
                                                   const ExecutionOptions& options) {
  if (runs < 2) throw std::invalid_argument("estimate_cost_first_interval: runs must be >= 2");
  const Batch batch = simulate_batch(n_agents, scheme, grid, runs, seed, options);
  if (batch.samples.size() < 2) throw StepBudgetExceeded(grid.max_steps(), batch.failed_runs);

  const std::size_t n = batch.samples.size();
  std::vector<double> t(n), q_pair(n), q_single(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = batch.samples[i].stopping_time;
    q_pair[i] = batch.samples[i].q_pair;
    q_single[i] = batch.samples[i].q_single;
  }

  FirstIntervalEstimate out;
  const auto config = fingerprint(n_agents, scheme, grid, runs, 0.0, seed, options);
  const bool valid = within_failure_budget(batch.failed_runs, runs);

  const auto pair = ratio_of_means(q_pair, t);
  out.pair = {pair.value, pair.std_error, EstimatorKind::first_interval_pair, config, batch.failed_runs, valid};

  const double pairs = static_cast<double>(n_agents) * (static_cast<double>(n_agents) - 1.0);
  const auto single = ratio_of_means(q_single, t);
  out.single = {pairs * single.value, pairs * single.std_error, EstimatorKind::first_interval_single, config,
                batch.failed_runs, valid};

  out.stopping_time = moment_stats(t);
  out.q_pair = moment_stats(q_pair);
  out.cov_q_pair_t = sample_covariance(q_pair, t);
  return out;
}

LongRunDetail estimate_cost_longrun_detail(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                           double horizon, std::uint64_t seed, const ExecutionOptions& options) {
  if (n_agents == 0) throw std::invalid_argument("estimate_cost_longrun: n_agents must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("estimate_cost_longrun: horizon must be finite and > 0");

  const std::uint64_t horizon_steps = period_steps(horizon, grid.dt());
  kernel::IntervalRequest rq;
  rq.key = derive_seed(seed, kLongRunSeedTag);
  rq.n_agents = n_agents;
  rq.dt = grid.dt();
  rq.accumulate_cost = true;
  const bool event = scheme.kind() == SchemeKind::event_triggered;
  rq.event_triggered = event;
  if (event) {
    rq.threshold = scheme.parameter();
    rq.bridge_correction = options.bridge_correction;
  } else {
    rq.period_steps = period_steps(scheme.parameter(), grid.dt());
  }
  const kernel::Isa isa = options.isa.value_or(kernel::best_isa());
  std::vector<double> scratch(kernel::padded_agents(n_agents));

  std::vector<double> q, t;
  CompensatedSum total_q;
  std::uint64_t elapsed = 0;
  std::uint64_t partial_steps = 0;
  for (std::uint64_t k = 0; elapsed < horizon_steps; ++k) {
    const std::uint64_t remaining = horizon_steps - elapsed;
    const std::uint64_t budget = event ? grid.max_steps() : rq.period_steps;
    rq.stream = k;
    rq.max_steps = std::min(remaining, budget);
    if (rq.max_steps > kernel::kMaxKernelSteps) throw std::invalid_argument("estimate_cost_longrun: step budget too large");
    const auto r = kernel::run_interval(isa, rq, scratch);
    total_q.add(r.q_pair);
    elapsed += r.steps;
    if (r.stop == kernel::Stop::budget) {
      if (remaining > budget) throw StepBudgetExceeded(grid.max_steps());
      partial_steps = r.steps;
      break;
    }
    q.push_back(r.q_pair);
    t.push_back(static_cast<double>(r.steps) * grid.dt());
  }

  LongRunDetail out;
  out.intervals = q.size();
  out.partial_time = static_cast<double>(partial_steps) * grid.dt();
  if (q.size() < 2) throw std::invalid_argument("estimate_cost_longrun: horizon covers fewer than two intervals");
  out.mean_interval = mean_of(t);
  if (horizon < 100.0 * out.mean_interval)
    throw std::invalid_argument("estimate_cost_longrun: horizon must be at least 100 mean inter-event times");

  const double total_time = static_cast<double>(horizon_steps) * grid.dt();
  // regenerative standard error from the completed cycles
  const double cycle_ratio = mean_of(q) / out.mean_interval;
  CompensatedSum resid;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = q[i] - cycle_ratio * t[i];
    resid.add(e * e);
  }
  const auto n = static_cast<double>(q.size());
  const double se = std::sqrt(resid.value() / (n * (n - 1.0))) / out.mean_interval;

  out.estimate = {total_q.value() / total_time, se, EstimatorKind::long_run_trajectory,
                  fingerprint(n_agents, scheme, grid, 0, horizon, seed, options), 0, true};
  return out;
}

CostEstimate estimate_cost_longrun(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                   double horizon, std::uint64_t seed, const ExecutionOptions& options) {
  return estimate_cost_longrun_detail(n_agents, scheme, grid, horizon, seed, options).estimate;
}

ExitTimes exit_time_samples(std::uint32_t n_agents, double threshold, const SimGrid& grid, std::uint64_t runs,
                            std::uint64_t seed, const ExecutionOptions& options) {
  const Batch batch = simulate_batch(n_agents, TriggerScheme(EventTriggered{threshold}), grid, runs, seed, options,
                                     /*accumulate_cost=*/false);
  ExitTimes out;
  out.failed_runs = batch.failed_runs;
  out.times.reserve(batch.samples.size());
  for (const auto& s : batch.samples) out.times.push_back(s.stopping_time);
  return out;
}

MomentStats estimate_exit_moments(std::uint32_t n_agents, double threshold, const SimGrid& grid, std::uint64_t runs,
                                  std::uint64_t seed, const ExecutionOptions& options) {
  if (runs < 2) throw std::invalid_argument("estimate_exit_moments: runs must be >= 2");
  const auto samples = exit_time_samples(n_agents, threshold, grid, runs, seed, options);
  if (samples.times.size() < 2) throw StepBudgetExceeded(grid.max_steps(), samples.failed_runs);
  return moment_stats(samples.times);
}

}  // namespace etsim
