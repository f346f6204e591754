#pragma once

// Inner simulation loop for one inter-event interval.
//
// Three implementations share one templated body: a portable scalar
// reference and AVX2 / AVX-512 variants picked at runtime. All of them
// perform the same IEEE operations in the same order (no FMA contraction,
// fixed 16-lane reduction tree), so every variant returns bitwise identical
// results for identical requests.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etsim::kernel {

enum class Isa : std::uint8_t { scalar, avx2, avx512 };

/// Agents are processed in chunks of this many lanes regardless of ISA.
inline constexpr std::uint32_t kLanes = 16;

/// Philox counter word 1 carries the agent index; this bit marks the
/// bridge-uniform stream of an agent.
inline constexpr std::uint32_t kBridgeStreamBit = 0x80000000u;

/// Largest step budget accepted by the kernel (block counter is 32 bits wide).
inline constexpr std::uint64_t kMaxKernelSteps = (std::uint64_t{1} << 34) - 4;

struct IntervalRequest {
  std::uint64_t key = 0;     // Philox key (master seed)
  std::uint64_t stream = 0;  // sub-stream (run index), counter words 2 and 3
  std::uint32_t n_agents = 1;
  double dt = 1e-4;
  double threshold = 1.0;         // event threshold, used when event_triggered
  bool event_triggered = true;
  std::uint64_t period_steps = 0; // time-triggered stop step, used otherwise
  std::uint64_t max_steps = 10'000'000;
  bool accumulate_cost = true;
  bool bridge_correction = false;
};

enum class Stop : std::uint8_t { event, period, budget };

struct IntervalResult {
  Stop stop = Stop::budget;
  std::uint64_t steps = 0;        // grid steps taken until the stop
  std::uint32_t agent = 0;        // lowest crossing agent (event stops only)
  double q_pair = 0.0;            // trapezoid integral of N*sum(d^2) - (sum d)^2
  double q_single = 0.0;          // trapezoid integral of d_0^2
};

[[nodiscard]] constexpr std::uint32_t padded_agents(std::uint32_t n) noexcept {
  return (n + kLanes - 1) / kLanes * kLanes;
}

/// Runs one interval on the requested ISA. `scratch` must hold at least
/// padded_agents(n_agents) doubles; its contents on entry are ignored.
/// Throws std::invalid_argument for malformed requests or an ISA that is
/// not available on this machine.
IntervalResult run_interval(Isa isa, const IntervalRequest& request, std::span<double> scratch);

/// Convenience overload on the best available ISA with an internal buffer.
IntervalResult run_interval(const IntervalRequest& request);

[[nodiscard]] bool isa_available(Isa isa) noexcept;
[[nodiscard]] Isa best_isa() noexcept;
[[nodiscard]] std::vector<Isa> available_isas();
[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;
/// Parses "scalar", "avx2", "avx512"; throws std::invalid_argument otherwise.
[[nodiscard]] Isa parse_isa(std::string_view name);

}  // namespace etsim::kernel
