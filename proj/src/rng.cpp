#include "etsim/rng.hpp"

#include "kernel/backend_scalar.hpp"
#include "kernel/simd_math.hpp"

namespace etsim {

namespace {

using kernel::Lane1;

kernel::math::Counter4<Lane1> block_bits(const RngStream& rng, std::uint32_t word1, std::uint64_t step) noexcept {
  const auto key = rng.master_seed;
  return kernel::math::philox4x32_10<Lane1>(
      {static_cast<std::uint32_t>(step >> 2), word1, static_cast<std::uint32_t>(rng.stream_index),
       static_cast<std::uint32_t>(rng.stream_index >> 32)},
      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32));
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept {
  const auto c = kernel::math::philox4x32_10<Lane1>({counter[0], counter[1], counter[2], counter[3]}, key[0], key[1]);
  return {c.x0, c.x1, c.x2, c.x3};
}

float standard_normal(const RngStream& rng, std::uint32_t agent, std::uint64_t step) noexcept {
  const auto bits = block_bits(rng, agent, step);
  const auto quad = kernel::math::normals_from_block<Lane1>(bits);
  return quad.z[step & 3u];
}

std::uint32_t bridge_bits(const RngStream& rng, std::uint32_t agent, std::uint64_t step) noexcept {
  const auto bits = block_bits(rng, agent | kernel::kBridgeStreamBit, step);
  switch (step & 3u) {
    case 0: return bits.x0;
    case 1: return bits.x1;
    case 2: return bits.x2;
    default: return bits.x3;
  }
}

}  // namespace etsim
