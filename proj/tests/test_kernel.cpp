#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "etsim/kernel.hpp"
#include "etsim/rng.hpp"
#include "etsim/triggering.hpp"
#include "kernel/backend_scalar.hpp"
#include "kernel/simd_math.hpp"

using namespace etsim;
using etsim::kernel::Isa;
using etsim::kernel::Lane1;

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

void require_identical(const kernel::IntervalResult& a, const kernel::IntervalResult& b) {
  CHECK(a.stop == b.stop);
  CHECK(a.steps == b.steps);
  CHECK(a.agent == b.agent);
  CHECK(same_bits(a.q_pair, b.q_pair));
  CHECK(same_bits(a.q_single, b.q_single));
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) == A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("philox with lane-uniform early rounds matches the generic block function") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 20000; ++i) {
    const auto w = gen();
    const auto k = gen();
    const auto s = gen();
    const auto w0 = static_cast<std::uint32_t>(w), w1 = static_cast<std::uint32_t>(w >> 32);
    const auto w2 = static_cast<std::uint32_t>(s), w3 = static_cast<std::uint32_t>(s >> 32);
    const auto k0 = static_cast<std::uint32_t>(k), k1 = static_cast<std::uint32_t>(k >> 32);
    const auto a = kernel::math::philox4x32_10<Lane1>({w0, w1, w2, w3}, k0, k1);
    const auto b = kernel::math::philox4x32_10_word1<Lane1>(w0, w1, w2, w3, k0, k1);
    REQUIRE(a.x0 == b.x0);
    REQUIRE(a.x1 == b.x1);
    REQUIRE(a.x2 == b.x2);
    REQUIRE(a.x3 == b.x3);
  }
}

TEST_CASE("uniform mapping stays inside (0, 1]") {
  CHECK(kernel::math::uniform_open<Lane1>(0u) == doctest::Approx(0x1p-32));
  CHECK(kernel::math::uniform_open<Lane1>(0u) > 0.0f);
  CHECK(kernel::math::uniform_open<Lane1>(~0u) <= 1.0f);
}

TEST_CASE("polynomial log is accurate to a few float ulps") {
  std::mt19937 gen(3);
  double worst = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const float u = kernel::math::uniform_open<Lane1>(gen());
    const double exact = std::log(static_cast<double>(u));
    const double got = kernel::math::log_positive<Lane1>(u);
    worst = std::max(worst, std::fabs(got - exact) / std::max(1.0, std::fabs(exact)));
  }
  CHECK(worst < 4e-7);
  CHECK(kernel::math::log_positive<Lane1>(1.0f) == 0.0f);
  CHECK(kernel::math::log_positive<Lane1>(0x1p-32f) == doctest::Approx(-32.0 * std::numbers::ln2).epsilon(1e-7));
}

TEST_CASE("sin and cos of 2 pi t with exact quadrant reduction") {
  double worst = 0.0;
  for (std::uint32_t t = 0; t < (1u << 24); t += 97) {
    const auto sc = kernel::math::sincos_turns<Lane1>(t);
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) * 0x1p-24;
    worst = std::max({worst, std::fabs(sc.sin - std::sin(angle)), std::fabs(sc.cos - std::cos(angle))});
  }
  CHECK(worst < 3e-7);
  const auto quarter = kernel::math::sincos_turns<Lane1>(1u << 22);
  CHECK(quarter.sin == 1.0f);
  CHECK(quarter.cos == 0.0f);
}

TEST_CASE("every kernel variant reports the scalar reference bits") {
  const auto isas = kernel::available_isas();
  MESSAGE("kernel variants on this machine: " << isas.size());
  const std::uint32_t sizes[] = {1, 2, 5, 15, 16, 17, 31, 33, 72, 100};
  for (const auto n : sizes) {
    for (int variant = 0; variant < 6; ++variant) {
      kernel::IntervalRequest rq;
      rq.key = 0x1234'5678'9abc'def0ull + n;
      rq.n_agents = n;
      rq.dt = 1e-3;
      rq.event_triggered = variant < 4;
      rq.accumulate_cost = variant % 2 == 0;
      rq.bridge_correction = variant == 2 || variant == 3;
      rq.threshold = 0.6;
      rq.period_steps = 137;
      rq.max_steps = 50'000;
      for (std::uint64_t stream = 0; stream < 12; ++stream) {
        rq.stream = stream;
        std::vector<double> ref_dev(kernel::padded_agents(n));
        const auto ref = kernel::run_interval(Isa::scalar, rq, ref_dev);
        for (const auto isa : isas) {
          CAPTURE(kernel::isa_name(isa));
          CAPTURE(n);
          CAPTURE(variant);
          CAPTURE(stream);
          std::vector<double> dev(kernel::padded_agents(n), 42.0);
          const auto got = kernel::run_interval(isa, rq, dev);
          require_identical(ref, got);
          for (std::size_t i = 0; i < dev.size(); ++i) REQUIRE(same_bits(dev[i], ref_dev[i]));
        }
      }
    }
  }
}

TEST_CASE("kernel matches the step-by-step composition of the public operations") {
  const SimGrid grid(2e-3, 100'000);
  for (const std::uint32_t n : {1u, 3u, 17u, 40u}) {
    for (const bool bridge : {false, true}) {
      for (std::uint64_t run = 0; run < 6; ++run) {
        CAPTURE(n);
        CAPTURE(bridge);
        CAPTURE(run);
        const RngStream rng{99, run};
        const TriggerScheme et(EventTriggered{0.5});
        IntervalOptions opts;
        opts.bridge_correction = bridge;
        const auto fast = simulate_interval(n, et, grid, rng, opts);
        const auto slow = simulate_interval_reference(n, et, grid, rng, bridge);
        CHECK(fast.steps == slow.steps);
        CHECK(fast.event.agent == slow.event.agent);
        CHECK(same_bits(fast.q_pair, slow.q_pair));
        CHECK(same_bits(fast.q_single, slow.q_single));
        CHECK(same_bits(fast.stopping_time, slow.stopping_time));
      }
    }
    const TriggerScheme tt(TimeTriggered{0.05});
    const auto fast = simulate_interval(n, tt, grid, RngStream{5, 1});
    const auto slow = simulate_interval_reference(n, tt, grid, RngStream{5, 1});
    CHECK(fast.steps == 25);
    CHECK(fast.steps == slow.steps);
    CHECK(same_bits(fast.q_pair, slow.q_pair));
    CHECK(same_bits(fast.q_single, slow.q_single));
  }
}

TEST_CASE("bridge correction only ever stops earlier") {
  const SimGrid grid(1e-2, 1'000'000);
  const TriggerScheme et(EventTriggered{1.0});
  IntervalOptions bridged;
  bridged.bridge_correction = true;
  double plain_sum = 0.0;
  double bridged_sum = 0.0;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto a = simulate_interval(1, et, grid, RngStream{11, r});
    const auto b = simulate_interval(1, et, grid, RngStream{11, r}, bridged);
    REQUIRE(b.steps <= a.steps);
    plain_sum += a.stopping_time;
    bridged_sum += b.stopping_time;
  }
  // exact mean is 1; a coarse grid overshoots, the bridge test removes most of that
  CHECK(plain_sum / 2000 > 1.05);
  CHECK(std::fabs(bridged_sum / 2000 - 1.0) < 0.07);
}

TEST_CASE("budget stop and malformed requests") {
  kernel::IntervalRequest rq;
  rq.n_agents = 3;
  rq.threshold = 100.0;
  rq.max_steps = 10;
  const auto r = kernel::run_interval(rq);
  CHECK(r.stop == kernel::Stop::budget);
  CHECK(r.steps == 10);

  std::vector<double> tiny(4);
  CHECK_THROWS_AS((void)kernel::run_interval(Isa::scalar, rq, tiny), std::invalid_argument);
  rq.n_agents = 0;
  CHECK_THROWS_AS((void)kernel::run_interval(rq), std::invalid_argument);
  rq.n_agents = 1;
  rq.dt = 0.0;
  CHECK_THROWS_AS((void)kernel::run_interval(rq), std::invalid_argument);
  rq.dt = 1e-4;
  rq.event_triggered = false;
  rq.period_steps = 0;
  CHECK_THROWS_AS((void)kernel::run_interval(rq), std::invalid_argument);
}

TEST_CASE("ISA names round-trip") {
  for (const auto isa : {Isa::scalar, Isa::avx2, Isa::avx512}) CHECK(kernel::parse_isa(kernel::isa_name(isa)) == isa);
  CHECK_THROWS_AS((void)kernel::parse_isa("neon"), std::invalid_argument);
  CHECK(kernel::isa_available(Isa::scalar));
  CHECK(kernel::isa_available(kernel::best_isa()));
}
