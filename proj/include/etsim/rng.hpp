#pragma once

// Counter-based random streams.
//
// A stream is addressed by (master_seed, stream_index). Within a stream the
// normal driving agent `a` at grid step `s` is a pure function of (a, s), so
// results never depend on evaluation order or on how runs are spread over
// threads. The same bits are produced by the SIMD interval kernels.

#include <array>
#include <cstdint>

namespace etsim {

struct RngStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Raw Philox4x32-10 block function.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                         std::array<std::uint32_t, 2> key) noexcept;

/// Standard normal driving `agent` from grid step `step` to `step + 1`.
[[nodiscard]] float standard_normal(const RngStream& rng, std::uint32_t agent, std::uint64_t step) noexcept;

/// 32 uniform bits used by the optional bridge crossing test for the same
/// (agent, step) pair; independent of the normal stream.
[[nodiscard]] std::uint32_t bridge_bits(const RngStream& rng, std::uint32_t agent, std::uint64_t step) noexcept;

/// splitmix64 finaliser; used to derive keys for auxiliary experiments.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(seed ^ mix64(tag));
}

}  // namespace etsim
