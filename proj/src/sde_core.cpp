#include "etsim/sde_core.hpp"

#include <cmath>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace etsim {

SimGrid::SimGrid(double dt, std::uint64_t max_steps) : dt_(dt), max_steps_(max_steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SimGrid: dt must be finite and > 0, got " + std::to_string(dt));
  if (max_steps == 0) throw std::invalid_argument("SimGrid: max_steps must be >= 1");
}

EnsembleState::EnsembleState(std::uint32_t n_agents) {
  if (n_agents == 0) throw std::invalid_argument("EnsembleState: n_agents must be >= 1");
  deviations_.assign(n_agents, 0.0);
}

void EnsembleState::advance_clock(std::uint64_t steps, double dt) noexcept {
  steps_since_event_ += steps;
  t_since_event_ = static_cast<double>(steps_since_event_) * dt;
}

void EnsembleState::reset() noexcept {
  std::fill(deviations_.begin(), deviations_.end(), 0.0);
  t_since_event_ = 0.0;
  steps_since_event_ = 0;
}

namespace {

EnsembleState advance(EnsembleState state, double dt, const RngStream& rng, std::span<const std::uint32_t> stream_agents) {
  const double scale = std::sqrt(dt);
  const std::uint64_t step = state.steps_since_event();
  auto d = state.deviations();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto agent = stream_agents.empty() ? static_cast<std::uint32_t>(i) : stream_agents[i];
    d[i] = d[i] + scale * static_cast<double>(standard_normal(rng, agent, step));
  }
  state.advance_clock(1, dt);
  return state;
}

}  // namespace

EnsembleState step_ensemble(EnsembleState state, const SimGrid& grid, const RngStream& rng) {
  return advance(std::move(state), grid.dt(), rng, {});
}

EnsembleState step_ensemble(EnsembleState state, const SimGrid& grid, const RngStream& rng,
                            std::span<const std::uint32_t> stream_agents) {
  if (stream_agents.size() != state.n_agents())
    throw std::invalid_argument("step_ensemble: one stream agent per slot required");
  return advance(std::move(state), grid.dt(), rng, stream_agents);
}

EnsembleState step_ensemble(EnsembleState state, double dt, const RngStream& rng) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step_ensemble: dt must be finite and >= 0");
  if (dt == 0.0) return state;
  return advance(std::move(state), dt, rng, {});
}

EnsembleState reset_to_consensus(EnsembleState state) noexcept {
  state.reset();
  return state;
}

}  // namespace etsim
