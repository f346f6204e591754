#pragma once

// Time- and event-triggered stopping rules for one inter-event interval.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>

#include "etsim/kernel.hpp"
#include "etsim/rng.hpp"
#include "etsim/sde_core.hpp"

namespace etsim {

struct TimeTriggered {
  double period;
};

struct EventTriggered {
  double threshold;
};

enum class SchemeKind : std::uint8_t { time_triggered, event_triggered };

/// Throws std::invalid_argument when the period or threshold is not a
/// finite positive number.
class TriggerScheme {
 public:
  TriggerScheme(TimeTriggered tt);
  TriggerScheme(EventTriggered et);

  [[nodiscard]] SchemeKind kind() const noexcept {
    return std::holds_alternative<TimeTriggered>(rule_) ? SchemeKind::time_triggered : SchemeKind::event_triggered;
  }
  /// Period (time-triggered) or threshold (event-triggered).
  [[nodiscard]] double parameter() const noexcept;
  [[nodiscard]] const std::variant<TimeTriggered, EventTriggered>& rule() const noexcept { return rule_; }

 private:
  std::variant<TimeTriggered, EventTriggered> rule_;
};

struct TriggerEvent {
  double time = 0.0;
  std::optional<std::uint32_t> agent;  // 0-based; empty for time-triggered stops
  SchemeKind kind = SchemeKind::event_triggered;
};

/// Elapsed times within this relative distance below the period count as
/// having reached it, so that n * dt == period fires at step n despite
/// rounding in dt.
inline constexpr double kPeriodRelativeSlack = 1e-9;

/// Time-triggered: fires once t_since_event reaches the period.
/// Event-triggered: fires when some |deviation| >= threshold and reports the
/// lowest such agent.
[[nodiscard]] std::optional<TriggerEvent> check_trigger(const EnsembleState& state, const TriggerScheme& scheme);

/// Number of grid steps after which a time-triggered interval stops.
[[nodiscard]] std::uint64_t period_steps(double period, double dt);

struct IntervalSample {
  double stopping_time = 0.0;
  std::uint64_t steps = 0;
  double q_pair = 0.0;    // integral of sum over ordered pairs / 2 of (d_i - d_j)^2
  double q_single = 0.0;  // integral of d_0^2
  TriggerEvent event;
};

class StepBudgetExceeded : public std::runtime_error {
 public:
  StepBudgetExceeded(std::uint64_t budget, std::uint64_t failed_runs = 1);
  [[nodiscard]] std::uint64_t budget() const noexcept { return budget_; }
  [[nodiscard]] std::uint64_t failed_runs() const noexcept { return failed_runs_; }

 private:
  std::uint64_t budget_;
  std::uint64_t failed_runs_;
};

struct IntervalOptions {
  bool accumulate_cost = true;
  bool bridge_correction = false;
  /// Kernel variant; the best available one when empty.
  std::optional<kernel::Isa> isa;
};

/// Runs one interval from consensus until the scheme fires. Throws
/// StepBudgetExceeded when grid.max_steps() steps pass without a trigger.
[[nodiscard]] IntervalSample simulate_interval(std::uint32_t n_agents, const TriggerScheme& scheme, const SimGrid& grid,
                                               const RngStream& rng, const IntervalOptions& options = {});

/// Same contract, built from step_ensemble, check_trigger and
/// accumulate_cost one step at a time. Much slower; used to pin the kernels.
/// `stream_agents`, when given, maps slots to agent sub-streams.
[[nodiscard]] IntervalSample simulate_interval_reference(std::uint32_t n_agents, const TriggerScheme& scheme,
                                                         const SimGrid& grid, const RngStream& rng,
                                                         bool bridge_correction = false,
                                                         std::span<const std::uint32_t> stream_agents = {});

}  // namespace etsim
