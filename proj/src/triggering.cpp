#include "etsim/triggering.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "etsim/cost.hpp"
#include "kernel/backend_scalar.hpp"
#include "kernel/simd_math.hpp"

namespace etsim {

namespace {

double checked_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument(std::string("TriggerScheme: ") + what + " must be finite and > 0");
  return value;
}

// Scalar form of the kernel's bridge test; same operation sequence.
bool bridge_crossed(double prev, double next, double threshold, double minus_two_over_dt, std::uint32_t bits) {
  using kernel::Lane1;
  namespace m = kernel::math;
  const auto log_p_up = static_cast<float>(((threshold - prev) * (threshold - next)) * minus_two_over_dt);
  const auto log_p_low = static_cast<float>(((threshold + prev) * (threshold + next)) * minus_two_over_dt);
  const float log_u = m::log_positive<Lane1>(m::uniform_open<Lane1>(bits));
  const float log_u_c = m::log_positive<Lane1>(m::uniform_open<Lane1>(~bits));
  return log_u < log_p_up || log_u_c < log_p_low;
}

}  // namespace

TriggerScheme::TriggerScheme(TimeTriggered tt) : rule_(TimeTriggered{checked_positive(tt.period, "period")}) {}
TriggerScheme::TriggerScheme(EventTriggered et) : rule_(EventTriggered{checked_positive(et.threshold, "threshold")}) {}

double TriggerScheme::parameter() const noexcept {
  return std::visit([](const auto& r) {
    if constexpr (std::is_same_v<std::decay_t<decltype(r)>, TimeTriggered>) return r.period;
    else return r.threshold;
  }, rule_);
}

std::optional<TriggerEvent> check_trigger(const EnsembleState& state, const TriggerScheme& scheme) {
  const double t = state.t_since_event();
  if (const auto* tt = std::get_if<TimeTriggered>(&scheme.rule())) {
    if (t >= tt->period * (1.0 - kPeriodRelativeSlack)) return TriggerEvent{t, std::nullopt, SchemeKind::time_triggered};
    return std::nullopt;
  }
  const double threshold = std::get<EventTriggered>(scheme.rule()).threshold;
  const auto d = state.deviations();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::fabs(d[i]) >= threshold) return TriggerEvent{t, static_cast<std::uint32_t>(i), SchemeKind::event_triggered};
  }
  return std::nullopt;
}

std::uint64_t period_steps(double period, double dt) {
  checked_positive(period, "period");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("period_steps: dt must be finite and > 0");
  const double target = period * (1.0 - kPeriodRelativeSlack);
  const double guess = std::ceil(target / dt);
  if (!(guess < 1.8e19)) throw std::invalid_argument("period_steps: period / dt too large");
  auto n = static_cast<std::uint64_t>(guess < 1.0 ? 1.0 : guess);
  while (n > 1 && static_cast<double>(n - 1) * dt >= target) --n;
  while (static_cast<double>(n) * dt < target) ++n;
  return n;
}

StepBudgetExceeded::StepBudgetExceeded(std::uint64_t budget, std::uint64_t failed_runs)
    : std::runtime_error("no trigger within " + std::to_string(budget) + " steps (" + std::to_string(failed_runs) +
                         " failed runs)"),
      budget_(budget),
      failed_runs_(failed_runs) {}

IntervalSample simulate_interval(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                 const RngStream& rng, const IntervalOptions& options) {
  if (n_agents == 0) throw std::invalid_argument("simulate_interval: n_agents must be >= 1");
  kernel::IntervalRequest rq;
  rq.key = rng.master_seed;
  rq.stream = rng.stream_index;
  rq.n_agents = n_agents;
  rq.dt = grid.dt();
  rq.accumulate_cost = options.accumulate_cost;
  if (scheme.kind() == SchemeKind::event_triggered) {
    rq.event_triggered = true;
    rq.threshold = scheme.parameter();
    rq.bridge_correction = options.bridge_correction;
    rq.max_steps = grid.max_steps();
  } else {
    rq.event_triggered = false;
    rq.period_steps = period_steps(scheme.parameter(), grid.dt());
    rq.max_steps = rq.period_steps;
  }
  if (rq.max_steps > kernel::kMaxKernelSteps) throw std::invalid_argument("simulate_interval: step budget too large");

  thread_local std::vector<double> scratch;
  scratch.resize(kernel::padded_agents(n_agents));
  const auto r = kernel::run_interval(options.isa.value_or(kernel::best_isa()), rq, scratch);
  if (r.stop == kernel::Stop::budget) throw StepBudgetExceeded(grid.max_steps());

  IntervalSample s;
  s.steps = r.steps;
  s.stopping_time = static_cast<double>(r.steps) * grid.dt();
  s.q_pair = r.q_pair;
  s.q_single = r.q_single;
  s.event.time = s.stopping_time;
  s.event.kind = scheme.kind();
  if (r.stop == kernel::Stop::event) s.event.agent = r.agent;
  return s;
}

IntervalSample simulate_interval_reference(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                           const RngStream& rng, bool bridge_correction,
                                           std::span<const std::uint32_t> stream_agents) {
  if (!stream_agents.empty() && stream_agents.size() != n_agents)
    throw std::invalid_argument("simulate_interval_reference: one stream agent per slot required");
  const bool event = scheme.kind() == SchemeKind::event_triggered;
  const double threshold = event ? scheme.parameter() : 0.0;
  const double minus_two_over_dt = -2.0 / grid.dt();
  const std::uint64_t budget = event ? grid.max_steps() : period_steps(scheme.parameter(), grid.dt());

  EnsembleState state(n_agents);
  IntervalSample s;
  while (state.steps_since_event() < budget) {
    const std::uint64_t step = state.steps_since_event();
    EnsembleState next = stream_agents.empty() ? step_ensemble(state, grid, rng)
                                               : step_ensemble(state, grid, rng, stream_agents);
    const auto inc = accumulate_cost(state.deviations(), next.deviations(), grid.dt());
    s.q_pair += inc.pair;
    s.q_single += inc.single;

    std::optional<TriggerEvent> fired;
    if (event && bridge_correction) {
      const auto before = state.deviations();
      const auto after = next.deviations();
      for (std::uint32_t i = 0; i < n_agents && !fired; ++i) {
        const auto agent = stream_agents.empty() ? i : stream_agents[i];
        if (std::fabs(after[i]) >= threshold ||
            bridge_crossed(before[i], after[i], threshold, minus_two_over_dt, bridge_bits(rng, agent, step)))
          fired = TriggerEvent{next.t_since_event(), i, SchemeKind::event_triggered};
      }
    } else {
      fired = check_trigger(next, scheme);
    }
    state = std::move(next);
    if (fired) {
      s.steps = state.steps_since_event();
      s.stopping_time = static_cast<double>(s.steps) * grid.dt();
      s.event = *fired;
      s.event.time = s.stopping_time;
      return s;
    }
  }
  if (!event) {
    // rounding slack in check_trigger is mirrored by period_steps, so this is unreachable
    throw std::logic_error("simulate_interval_reference: period not reached");
  }
  throw StepBudgetExceeded(grid.max_steps());
}

}  // namespace etsim
