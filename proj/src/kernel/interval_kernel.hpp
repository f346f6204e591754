#pragma once

// Templated interval body shared by every ISA translation unit.
//
// Layout: agents live in chunks of 16 lanes; grid steps are taken in blocks
// of four because one Philox call per lane yields the normals for four
// consecutive steps. Within a block each chunk advances through all four
// sub-steps while per-step lane partial sums are collected; the block is then
// reduced with a fixed tree and scanned for the first stopping step. Steps
// past the stop are computed but discarded, which is harmless because the
// normals are addressed by (agent, step) rather than drawn from a sequence.
//
// Included only from the per-ISA .cpp files; everything here has internal
// linkage so instantiations compiled with different target flags never merge.

#include <cstdint>

#include "etsim/kernel.hpp"
#include "simd_math.hpp"

namespace etsim::kernel {

struct KernelArgs {
  IntervalRequest request;
  double sqrt_dt;
  double half_dt;
  double minus_two_over_dt;
};

namespace {

inline constexpr std::uint32_t kNoAgent = 0xffffffffu;

inline double tree_sum16(double* a) {
  for (int i = 0; i < 8; ++i) a[i] = a[i] + a[i + 8];
  for (int i = 0; i < 4; ++i) a[i] = a[i] + a[i + 4];
  for (int i = 0; i < 2; ++i) a[i] = a[i] + a[i + 2];
  return a[0] + a[1];
}

template <class B>
inline typename B::U pick_word(const math::Counter4<B>& c, int k) {
  switch (k) {
    case 0: return c.x0;
    case 1: return c.x1;
    case 2: return c.x2;
    default: return c.x3;
  }
}

// Brownian-bridge crossing test between two grid values: one uniform u per
// agent and step; upper crossing iff u < p_up, lower iff 1-u < p_low, with
// p = exp(-2 (D - a)(D - b) / dt) compared in the log domain.
template <class B>
inline std::uint32_t bridge_crossings(const typename B::D& prev, const typename B::D& next,
                                      typename B::U bits, const typename B::D& threshold,
                                      const typename B::D& minus_two_over_dt) {
  const auto gap_up = B::d_mul(B::d_sub(threshold, prev), B::d_sub(threshold, next));
  const auto gap_low = B::d_mul(B::d_add(threshold, prev), B::d_add(threshold, next));
  const auto log_p_up = B::d_to_f(B::d_mul(gap_up, minus_two_over_dt));
  const auto log_p_low = B::d_to_f(B::d_mul(gap_low, minus_two_over_dt));
  const auto log_u = math::log_positive<B>(math::uniform_open<B>(bits));
  const auto log_u_c = math::log_positive<B>(math::uniform_open<B>(B::u_xor(bits, B::u_set1(~0u))));
  return B::f_lt_bits(log_u, log_p_up) | B::f_lt_bits(log_u_c, log_p_low);
}

template <class B, bool kEvent, bool kCost, bool kBridge>
IntervalResult simulate_interval(const KernelArgs& args, double* dev) {
  using D = typename B::D;
  const IntervalRequest& rq = args.request;
  const std::uint32_t n = rq.n_agents;
  const std::uint32_t chunks = padded_agents(n) / kLanes;
  const std::uint32_t tail = n - (chunks - 1) * kLanes;
  const std::uint32_t tail_mask = tail == kLanes ? 0xffffu : (1u << tail) - 1u;

  for (std::uint32_t i = 0; i < chunks * kLanes; ++i) dev[i] = 0.0;

  double tail_scale[kLanes];
  for (std::uint32_t l = 0; l < kLanes; ++l) tail_scale[l] = l < tail ? args.sqrt_dt : 0.0;
  const D inc_full = B::d_set1(args.sqrt_dt);
  const D inc_tail = B::d_load(tail_scale);
  const D threshold = B::d_set1(rq.threshold);
  const D m2dt = B::d_set1(args.minus_two_over_dt);
  const D zero = B::d_set1(0.0);

  const auto k0 = static_cast<std::uint32_t>(rq.key);
  const auto k1 = static_cast<std::uint32_t>(rq.key >> 32);
  const auto s2 = static_cast<std::uint32_t>(rq.stream);
  const auto s3 = static_cast<std::uint32_t>(rq.stream >> 32);
  const auto lanes = B::u_lane_index();
  const double n_real = static_cast<double>(n);

  IntervalResult out;
  double f_prev = 0.0;
  double g_prev = 0.0;

  for (std::uint64_t block = 0;; ++block) {
    D acc2[4] = {zero, zero, zero, zero};
    D acc1[4] = {zero, zero, zero, zero};
    std::uint32_t first[4] = {kNoAgent, kNoAgent, kNoAgent, kNoAgent};
    double d0[4] = {0.0, 0.0, 0.0, 0.0};
    const auto block32 = static_cast<std::uint32_t>(block);

    for (std::uint32_t c = 0; c < chunks; ++c) {
      double* p = dev + c * kLanes;
      D d = B::d_load(p);
      const auto agent = B::u_add(B::u_set1(c * kLanes), lanes);
      const auto bits = math::philox4x32_10_word1<B>(block32, agent, s2, s3, k0, k1);
      const auto z = math::normals_from_block<B>(bits);
      const bool last = c + 1 == chunks;
      const D inc = last ? inc_tail : inc_full;
      const std::uint32_t live = last ? tail_mask : 0xffffu;
      math::Counter4<B> bridge_bits{};
      if constexpr (kBridge) {
        bridge_bits = math::philox4x32_10_word1<B>(block32, B::u_or(agent, B::u_set1(kBridgeStreamBit)), s2, s3, k0, k1);
      }

      for (int k = 0; k < 4; ++k) {
        const D prev = d;
        d = B::d_add(d, B::d_mul(inc, B::d_from_f(z.z[k])));
        if constexpr (kCost) {
          acc2[k] = B::d_add(acc2[k], B::d_mul(d, d));
          acc1[k] = B::d_add(acc1[k], d);
          if (c == 0) {
            double lane_values[kLanes];
            B::d_store(lane_values, d);
            d0[k] = lane_values[0];
          }
        }
        if constexpr (kEvent) {
          std::uint32_t crossed = B::d_abs_ge_bits(d, threshold);
          if constexpr (kBridge) {
            crossed |= bridge_crossings<B>(prev, d, pick_word<B>(bridge_bits, k), threshold, m2dt);
          }
          crossed &= live;
          if (crossed != 0 && first[k] == kNoAgent) {
            first[k] = c * kLanes + static_cast<std::uint32_t>(__builtin_ctz(crossed));
          }
        }
      }
      B::d_store(p, d);
    }

    for (int k = 0; k < 4; ++k) {
      const std::uint64_t step = 4 * block + static_cast<std::uint64_t>(k) + 1;
      if (step > rq.max_steps) {
        out.stop = Stop::budget;
        out.steps = rq.max_steps;
        return out;
      }
      if constexpr (kCost) {
        double lanes2[kLanes];
        double lanes1[kLanes];
        B::d_store(lanes2, acc2[k]);
        B::d_store(lanes1, acc1[k]);
        const double sum2 = tree_sum16(lanes2);
        const double sum1 = tree_sum16(lanes1);
        const double f = n_real * sum2 - sum1 * sum1;
        const double g = d0[k] * d0[k];
        out.q_pair += args.half_dt * (f_prev + f);
        out.q_single += args.half_dt * (g_prev + g);
        f_prev = f;
        g_prev = g;
      }
      if constexpr (kEvent) {
        if (first[k] != kNoAgent) {
          out.stop = Stop::event;
          out.steps = step;
          out.agent = first[k];
          return out;
        }
      } else {
        if (step == rq.period_steps) {
          out.stop = Stop::period;
          out.steps = step;
          return out;
        }
      }
    }
  }
}

template <class B>
IntervalResult dispatch_variant(const KernelArgs& args, double* dev) {
  const IntervalRequest& rq = args.request;
  if (rq.event_triggered) {
    if (rq.accumulate_cost) {
      return rq.bridge_correction ? simulate_interval<B, true, true, true>(args, dev)
                                  : simulate_interval<B, true, true, false>(args, dev);
    }
    return rq.bridge_correction ? simulate_interval<B, true, false, true>(args, dev)
                                : simulate_interval<B, true, false, false>(args, dev);
  }
  return rq.accumulate_cost ? simulate_interval<B, false, true, false>(args, dev)
                            : simulate_interval<B, false, false, false>(args, dev);
}

}  // namespace

namespace detail {
IntervalResult run_scalar(const KernelArgs& args, double* dev);
IntervalResult run_avx2(const KernelArgs& args, double* dev);
IntervalResult run_avx512(const KernelArgs& args, double* dev);
}  // namespace detail

}  // namespace etsim::kernel
