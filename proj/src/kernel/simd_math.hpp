#pragma once

// Width-agnostic building blocks for the normal generator. Every function is
// a template over a backend `B` that supplies lane types U (uint32), F (float)
// and the primitive operations. The operation sequence is fixed here, so any
// backend that implements the primitives with plain IEEE semantics produces
// the same bits.

#include <cstdint>

namespace etsim::kernel::math {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

template <class B>
struct Counter4 {
  typename B::U x0, x1, x2, x3;
};

/// Philox4x32-10.
template <class B>
inline Counter4<B> philox4x32_10(Counter4<B> c, std::uint32_t k0, std::uint32_t k1) {
  using U = typename B::U;
  for (int round = 0; round < 10; ++round) {
    U lo0, hi0, lo1, hi1;
    B::mulhilo(c.x0, kPhiloxM0, lo0, hi0);
    B::mulhilo(c.x2, kPhiloxM1, lo1, hi1);
    c = Counter4<B>{B::u_xor(B::u_xor(hi1, c.x1), B::u_set1(k0)), lo1,
                    B::u_xor(B::u_xor(hi0, c.x3), B::u_set1(k1)), lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return c;
}

/// Philox4x32-10 for a pack whose counters differ only in word 1. The first
/// three rounds still have lane-uniform operands and run on scalars; the
/// result is bitwise identical to philox4x32_10 on the broadcast counter.
template <class B>
inline Counter4<B> philox4x32_10_word1(std::uint32_t w0, typename B::U w1, std::uint32_t w2,
                                       std::uint32_t w3, std::uint32_t k0, std::uint32_t k1) {
  using U = typename B::U;
  const auto mul = [](std::uint32_t a, std::uint32_t m) { return std::uint64_t{a} * m; };
  // round 1: both products lane-uniform
  const std::uint64_t p0 = mul(w0, kPhiloxM0);
  const std::uint64_t p1 = mul(w2, kPhiloxM1);
  U x0 = B::u_xor(B::u_set1(static_cast<std::uint32_t>(p1 >> 32) ^ k0), w1);
  std::uint32_t s1 = static_cast<std::uint32_t>(p1);
  std::uint32_t s2 = static_cast<std::uint32_t>(p0 >> 32) ^ w3 ^ k1;
  std::uint32_t s3 = static_cast<std::uint32_t>(p0);
  k0 += kPhiloxW0;
  k1 += kPhiloxW1;
  // round 2: word 0 varies, word 2 uniform
  U lo0, hi0;
  B::mulhilo(x0, kPhiloxM0, lo0, hi0);
  const std::uint64_t q1 = mul(s2, kPhiloxM1);
  const std::uint32_t t0 = static_cast<std::uint32_t>(q1 >> 32) ^ s1 ^ k0;
  const std::uint32_t t1 = static_cast<std::uint32_t>(q1);
  U x2 = B::u_xor(hi0, B::u_set1(s3 ^ k1));
  U x3 = lo0;
  k0 += kPhiloxW0;
  k1 += kPhiloxW1;
  // round 3: word 0 uniform, word 2 varies
  const std::uint64_t r0 = mul(t0, kPhiloxM0);
  U lo1, hi1;
  B::mulhilo(x2, kPhiloxM1, lo1, hi1);
  Counter4<B> c{B::u_xor(hi1, B::u_set1(t1 ^ k0)), lo1,
                B::u_xor(B::u_set1(static_cast<std::uint32_t>(r0 >> 32) ^ k1), x3),
                B::u_set1(static_cast<std::uint32_t>(r0))};
  k0 += kPhiloxW0;
  k1 += kPhiloxW1;
  for (int round = 3; round < 10; ++round) {
    B::mulhilo(c.x0, kPhiloxM0, lo0, hi0);
    B::mulhilo(c.x2, kPhiloxM1, lo1, hi1);
    c = Counter4<B>{B::u_xor(B::u_xor(hi1, c.x1), B::u_set1(k0)), lo1,
                    B::u_xor(B::u_xor(hi0, c.x3), B::u_set1(k1)), lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return c;
}

/// Maps 32 random bits to a float in [2^-32, 1]; never zero.
template <class B>
inline typename B::F uniform_open(typename B::U bits) {
  const auto scaled = B::f_mul(B::f_from_i32(B::template u_srli<1>(bits)), B::f_set1(0x1p-31f));
  return B::f_add(scaled, B::f_set1(0x1p-32f));
}

/// Natural logarithm for positive normal floats (Cephes polynomial).
template <class B>
inline typename B::F log_positive(typename B::F x) {
  using F = typename B::F;
  const auto bits = B::f_as_u(x);
  const auto mant = B::u_as_f(B::u_or(B::u_and(bits, B::u_set1(0x007fffffu)), B::u_set1(0x3f000000u)));
  // m in [0.5, 1); fold to [sqrt(1/2), sqrt(2)) by borrowing one from the exponent
  const auto small = B::u_lt_i32(B::f_as_u(mant), B::f_as_u(B::f_set1(0.707106781186547524f)));
  const auto expo_i = B::u_add(B::u_sub(B::template u_srli<23>(bits), B::u_set1(126u)), small);
  const F e = B::f_from_i32(expo_i);
  const F doubled = B::f_add(mant, mant);
  const F m = B::f_sub(B::u_as_f(B::u_blend(small, B::f_as_u(doubled), B::f_as_u(mant))), B::f_set1(1.0f));
  const F z = B::f_mul(m, m);

  F y = B::f_set1(7.0376836292e-2f);
  y = B::f_add(B::f_mul(y, m), B::f_set1(-1.1514610310e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(1.1676998740e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(-1.2420140846e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(1.4249322787e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(-1.6668057665e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(2.0000714765e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(-2.4999993993e-1f));
  y = B::f_add(B::f_mul(y, m), B::f_set1(3.3333331174e-1f));
  y = B::f_mul(B::f_mul(y, m), z);
  y = B::f_add(y, B::f_mul(e, B::f_set1(-2.12194440e-4f)));
  y = B::f_sub(y, B::f_mul(z, B::f_set1(0.5f)));
  const F r = B::f_add(m, y);
  return B::f_add(r, B::f_mul(e, B::f_set1(0.693359375f)));
}

template <class B>
struct SinCos {
  typename B::F sin, cos;
};

/// sin and cos of 2*pi*t for t = turns24 / 2^24, turns24 in [0, 2^24).
/// Reduction to [-pi/4, pi/4] is done in integer arithmetic and is exact.
template <class B>
inline SinCos<B> sincos_turns(typename B::U turns24) {
  using F = typename B::F;
  const auto quadrant = B::template u_srli<22>(B::u_add(turns24, B::u_set1(1u << 21)));  // 0..4
  const auto offset = B::u_sub(turns24, B::template u_slli<22>(quadrant));   // [-2^21, 2^21)
  const F phi = B::f_mul(B::f_from_i32(offset), B::f_set1(1.57079632679489662f * 0x1p-22f));
  const F z = B::f_mul(phi, phi);

  F s = B::f_set1(-1.9515295891e-4f);
  s = B::f_add(B::f_mul(s, z), B::f_set1(8.3321608736e-3f));
  s = B::f_add(B::f_mul(s, z), B::f_set1(-1.6666654611e-1f));
  s = B::f_mul(B::f_mul(s, z), phi);
  s = B::f_add(s, phi);

  F c = B::f_set1(2.443315711809948e-5f);
  c = B::f_add(B::f_mul(c, z), B::f_set1(-1.388731625493765e-3f));
  c = B::f_add(B::f_mul(c, z), B::f_set1(4.166664568298827e-2f));
  c = B::f_mul(B::f_mul(c, z), z);
  c = B::f_sub(c, B::f_mul(z, B::f_set1(0.5f)));
  c = B::f_add(c, B::f_set1(1.0f));

  const auto swap = B::u_sub(B::u_set1(0u), B::u_and(quadrant, B::u_set1(1u)));
  const auto sin_sign = B::template u_slli<30>(B::u_and(quadrant, B::u_set1(2u)));
  const auto cos_sign = B::template u_slli<30>(B::u_and(B::u_add(quadrant, B::u_set1(1u)), B::u_set1(2u)));
  const auto s_bits = B::f_as_u(s);
  const auto c_bits = B::f_as_u(c);
  return SinCos<B>{B::u_as_f(B::u_xor(B::u_blend(swap, c_bits, s_bits), sin_sign)),
                   B::u_as_f(B::u_xor(B::u_blend(swap, s_bits, c_bits), cos_sign))};
}

template <class B>
struct NormalPair {
  typename B::F first, second;
};

/// Box-Muller: two uniform words yield two independent standard normals.
template <class B>
inline NormalPair<B> box_muller(typename B::U radius_bits, typename B::U angle_bits) {
  const auto u = uniform_open<B>(radius_bits);
  const auto r2 = B::f_max(B::f_mul(B::f_set1(-2.0f), log_positive<B>(u)), B::f_set1(0.0f));
  const auto r = B::f_sqrt(r2);
  const auto sc = sincos_turns<B>(B::template u_srli<8>(angle_bits));
  return NormalPair<B>{B::f_mul(r, sc.cos), B::f_mul(r, sc.sin)};
}

/// Four normals for grid steps 4b..4b+3 from one Philox block.
template <class B>
struct NormalQuad {
  typename B::F z[4];
};

template <class B>
inline NormalQuad<B> normals_from_block(const Counter4<B>& bits) {
  const auto a = box_muller<B>(bits.x0, bits.x1);
  const auto b = box_muller<B>(bits.x2, bits.x3);
  return NormalQuad<B>{{a.first, a.second, b.first, b.second}};
}

}  // namespace etsim::kernel::math
