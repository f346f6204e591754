#pragma once

// N independent standard Brownian motions observed on a fixed time grid.
//
// The ensemble stores each agent's deviation from the state at the last
// consensus reset. Between resets every deviation is a Brownian motion
// started at zero, so the update d += sqrt(dt) * z with z ~ N(0, 1) is exact
// in distribution at grid points: Euler-Maruyama has no discretisation error
// for zero drift and unit diffusion.

#include <cstdint>
#include <span>
#include <vector>

#include "etsim/rng.hpp"

namespace etsim {

class SimGrid {
 public:
  static constexpr double kDefaultDt = 1e-4;
  static constexpr std::uint64_t kDefaultMaxSteps = 10'000'000;

  /// Throws std::invalid_argument unless dt > 0 (finite) and max_steps >= 1.
  explicit SimGrid(double dt = kDefaultDt, std::uint64_t max_steps = kDefaultMaxSteps);

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] std::uint64_t max_steps() const noexcept { return max_steps_; }

 private:
  double dt_;
  std::uint64_t max_steps_;
};

class EnsembleState {
 public:
  /// A consensus state of n_agents agents. Throws std::invalid_argument for n_agents == 0.
  explicit EnsembleState(std::uint32_t n_agents);

  [[nodiscard]] std::uint32_t n_agents() const noexcept { return static_cast<std::uint32_t>(deviations_.size()); }
  [[nodiscard]] std::span<const double> deviations() const noexcept { return deviations_; }
  [[nodiscard]] std::span<double> deviations() noexcept { return deviations_; }
  [[nodiscard]] double t_since_event() const noexcept { return t_since_event_; }
  [[nodiscard]] std::uint64_t steps_since_event() const noexcept { return steps_since_event_; }

  /// Moves the clock forward by `steps` grid steps of width dt.
  void advance_clock(std::uint64_t steps, double dt) noexcept;
  void reset() noexcept;

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;

 private:
  std::vector<double> deviations_;
  double t_since_event_ = 0.0;
  std::uint64_t steps_since_event_ = 0;
};

/// One grid step. Agent i draws from sub-stream agent i of `rng` at the
/// state's current step index. A stream therefore describes one interval;
/// use a fresh stream_index after each reset.
[[nodiscard]] EnsembleState step_ensemble(EnsembleState state, const SimGrid& grid, const RngStream& rng);

/// Same, with slot i driven by agent sub-stream `stream_agents[i]`.
[[nodiscard]] EnsembleState step_ensemble(EnsembleState state, const SimGrid& grid, const RngStream& rng,
                                          std::span<const std::uint32_t> stream_agents);

/// Raw step that also accepts dt == 0 (the identity). Throws
/// std::invalid_argument for negative or non-finite dt.
[[nodiscard]] EnsembleState step_ensemble(EnsembleState state, double dt, const RngStream& rng);

[[nodiscard]] EnsembleState reset_to_consensus(EnsembleState state) noexcept;

}  // namespace etsim
