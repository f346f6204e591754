#pragma once

// Portable backends. Lane1 is a single lane used by the reference stepping
// API; Scalar16 is the 16-lane reference kernel backend. Both use nothing
// but plain IEEE float/double arithmetic.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "etsim/kernel.hpp"

namespace etsim::kernel {

struct Lane1 {
  using U = std::uint32_t;
  using F = float;

  static U u_set1(std::uint32_t v) { return v; }
  static U u_add(U a, U b) { return a + b; }
  static U u_sub(U a, U b) { return a - b; }
  static U u_xor(U a, U b) { return a ^ b; }
  static U u_and(U a, U b) { return a & b; }
  static U u_or(U a, U b) { return a | b; }
  template <int N> static U u_srli(U a) { return a >> N; }
  template <int N> static U u_slli(U a) { return a << N; }
  static U u_lt_i32(U a, U b) {
    return static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b) ? ~0u : 0u;
  }
  static U u_blend(U mask, U a, U b) { return b ^ ((a ^ b) & mask); }
  static void mulhilo(U a, std::uint32_t m, U& lo, U& hi) {
    const std::uint64_t p = std::uint64_t{a} * m;
    lo = static_cast<U>(p);
    hi = static_cast<U>(p >> 32);
  }

  static F f_set1(float v) { return v; }
  static F f_add(F a, F b) { return a + b; }
  static F f_sub(F a, F b) { return a - b; }
  static F f_mul(F a, F b) { return a * b; }
  static F f_max(F a, F b) { return a > b ? a : b; }
  static F f_sqrt(F a) { return std::sqrt(a); }
  static F f_from_i32(U a) { return static_cast<float>(static_cast<std::int32_t>(a)); }
  static U f_as_u(F a) { return std::bit_cast<U>(a); }
  static F u_as_f(U a) { return std::bit_cast<F>(a); }
};

struct Scalar16 {
  struct U {
    std::uint32_t v[kLanes];
  };
  struct F {
    float v[kLanes];
  };
  struct D {
    double v[kLanes];
  };

  template <class T, class Op>
  static T map1(const T& a, Op op) {
    T r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = op(a.v[i]);
    return r;
  }
  template <class R, class T, class Op>
  static R map2(const T& a, const T& b, Op op) {
    R r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = op(a.v[i], b.v[i]);
    return r;
  }

  static U u_set1(std::uint32_t v) {
    U r;
    for (auto& x : r.v) x = v;
    return r;
  }
  static U u_lane_index() {
    U r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = i;
    return r;
  }
  static U u_add(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_add); }
  static U u_sub(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_sub); }
  static U u_xor(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_xor); }
  static U u_and(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_and); }
  static U u_or(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_or); }
  template <int N> static U u_srli(const U& a) { return map1(a, Lane1::u_srli<N>); }
  template <int N> static U u_slli(const U& a) { return map1(a, Lane1::u_slli<N>); }
  static U u_lt_i32(const U& a, const U& b) { return map2<U>(a, b, Lane1::u_lt_i32); }
  static U u_blend(const U& mask, const U& a, const U& b) {
    U r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = Lane1::u_blend(mask.v[i], a.v[i], b.v[i]);
    return r;
  }
  static void mulhilo(const U& a, std::uint32_t m, U& lo, U& hi) {
    for (std::uint32_t i = 0; i < kLanes; ++i) Lane1::mulhilo(a.v[i], m, lo.v[i], hi.v[i]);
  }

  static F f_set1(float v) {
    F r;
    for (auto& x : r.v) x = v;
    return r;
  }
  static F f_add(const F& a, const F& b) { return map2<F>(a, b, Lane1::f_add); }
  static F f_sub(const F& a, const F& b) { return map2<F>(a, b, Lane1::f_sub); }
  static F f_mul(const F& a, const F& b) { return map2<F>(a, b, Lane1::f_mul); }
  static F f_max(const F& a, const F& b) { return map2<F>(a, b, Lane1::f_max); }
  static F f_sqrt(const F& a) { return map1(a, Lane1::f_sqrt); }
  static F f_from_i32(const U& a) {
    F r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = Lane1::f_from_i32(a.v[i]);
    return r;
  }
  static U f_as_u(const F& a) {
    U r;
    std::memcpy(r.v, a.v, sizeof r.v);
    return r;
  }
  static F u_as_f(const U& a) {
    F r;
    std::memcpy(r.v, a.v, sizeof r.v);
    return r;
  }
  static std::uint32_t f_lt_bits(const F& a, const F& b) {
    std::uint32_t m = 0;
    for (std::uint32_t i = 0; i < kLanes; ++i) m |= static_cast<std::uint32_t>(a.v[i] < b.v[i]) << i;
    return m;
  }

  static D d_set1(double v) {
    D r;
    for (auto& x : r.v) x = v;
    return r;
  }
  static D d_load(const double* p) {
    D r;
    std::memcpy(r.v, p, sizeof r.v);
    return r;
  }
  static void d_store(double* p, const D& a) { std::memcpy(p, a.v, sizeof a.v); }
  static D d_from_f(const F& a) {
    D r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = static_cast<double>(a.v[i]);
    return r;
  }
  static F d_to_f(const D& a) {
    F r;
    for (std::uint32_t i = 0; i < kLanes; ++i) r.v[i] = static_cast<float>(a.v[i]);
    return r;
  }
  static D d_add(const D& a, const D& b) {
    return map2<D>(a, b, [](double x, double y) { return x + y; });
  }
  static D d_sub(const D& a, const D& b) {
    return map2<D>(a, b, [](double x, double y) { return x - y; });
  }
  static D d_mul(const D& a, const D& b) {
    return map2<D>(a, b, [](double x, double y) { return x * y; });
  }
  static std::uint32_t d_abs_ge_bits(const D& a, const D& threshold) {
    std::uint32_t m = 0;
    for (std::uint32_t i = 0; i < kLanes; ++i)
      m |= static_cast<std::uint32_t>(std::fabs(a.v[i]) >= threshold.v[i]) << i;
    return m;
  }
};

}  // namespace etsim::kernel
