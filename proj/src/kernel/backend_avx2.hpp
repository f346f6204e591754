#pragma once

// 16-lane backend on AVX2: two ymm registers per uint32/float pack,
// four per double pack. Only compiled into the translation unit built
// with -mavx2; keep standard-library templates out of this header.

#include <immintrin.h>

#include <cstdint>

#include "etsim/kernel.hpp"

namespace etsim::kernel {

struct Avx2 {
  struct U {
    __m256i a, b;
  };
  struct F {
    __m256 a, b;
  };
  struct D {
    __m256d a, b, c, d;
  };

  static U u_set1(std::uint32_t v) {
    const __m256i x = _mm256_set1_epi32(static_cast<int>(v));
    return {x, x};
  }
  static U u_lane_index() {
    return {_mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7), _mm256_setr_epi32(8, 9, 10, 11, 12, 13, 14, 15)};
  }
  static U u_add(U x, U y) { return {_mm256_add_epi32(x.a, y.a), _mm256_add_epi32(x.b, y.b)}; }
  static U u_sub(U x, U y) { return {_mm256_sub_epi32(x.a, y.a), _mm256_sub_epi32(x.b, y.b)}; }
  static U u_xor(U x, U y) { return {_mm256_xor_si256(x.a, y.a), _mm256_xor_si256(x.b, y.b)}; }
  static U u_and(U x, U y) { return {_mm256_and_si256(x.a, y.a), _mm256_and_si256(x.b, y.b)}; }
  static U u_or(U x, U y) { return {_mm256_or_si256(x.a, y.a), _mm256_or_si256(x.b, y.b)}; }
  template <int N> static U u_srli(U x) { return {_mm256_srli_epi32(x.a, N), _mm256_srli_epi32(x.b, N)}; }
  template <int N> static U u_slli(U x) { return {_mm256_slli_epi32(x.a, N), _mm256_slli_epi32(x.b, N)}; }
  static U u_lt_i32(U x, U y) { return {_mm256_cmpgt_epi32(y.a, x.a), _mm256_cmpgt_epi32(y.b, x.b)}; }
  static U u_blend(U mask, U x, U y) { return u_xor(y, u_and(u_xor(x, y), mask)); }

  static __m256i mul_lo_hi_half(__m256i x, __m256i m, __m256i& hi) {
    const __m256i even = _mm256_mul_epu32(x, m);
    const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(x, 32), m);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
    return _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0xAA);
  }
  static void mulhilo(U x, std::uint32_t m, U& lo, U& hi) {
    const __m256i mv = _mm256_set1_epi32(static_cast<int>(m));
    lo.a = mul_lo_hi_half(x.a, mv, hi.a);
    lo.b = mul_lo_hi_half(x.b, mv, hi.b);
  }

  static F f_set1(float v) {
    const __m256 x = _mm256_set1_ps(v);
    return {x, x};
  }
  static F f_add(F x, F y) { return {_mm256_add_ps(x.a, y.a), _mm256_add_ps(x.b, y.b)}; }
  static F f_sub(F x, F y) { return {_mm256_sub_ps(x.a, y.a), _mm256_sub_ps(x.b, y.b)}; }
  static F f_mul(F x, F y) { return {_mm256_mul_ps(x.a, y.a), _mm256_mul_ps(x.b, y.b)}; }
  static F f_max(F x, F y) { return {_mm256_max_ps(x.a, y.a), _mm256_max_ps(x.b, y.b)}; }
  static F f_sqrt(F x) { return {_mm256_sqrt_ps(x.a), _mm256_sqrt_ps(x.b)}; }
  static F f_from_i32(U x) { return {_mm256_cvtepi32_ps(x.a), _mm256_cvtepi32_ps(x.b)}; }
  static U f_as_u(F x) { return {_mm256_castps_si256(x.a), _mm256_castps_si256(x.b)}; }
  static F u_as_f(U x) { return {_mm256_castsi256_ps(x.a), _mm256_castsi256_ps(x.b)}; }
  static std::uint32_t f_lt_bits(F x, F y) {
    const auto lo = static_cast<std::uint32_t>(_mm256_movemask_ps(_mm256_cmp_ps(x.a, y.a, _CMP_LT_OQ)));
    const auto hi = static_cast<std::uint32_t>(_mm256_movemask_ps(_mm256_cmp_ps(x.b, y.b, _CMP_LT_OQ)));
    return lo | (hi << 8);
  }

  static D d_set1(double v) {
    const __m256d x = _mm256_set1_pd(v);
    return {x, x, x, x};
  }
  static D d_load(const double* p) {
    return {_mm256_loadu_pd(p), _mm256_loadu_pd(p + 4), _mm256_loadu_pd(p + 8), _mm256_loadu_pd(p + 12)};
  }
  static void d_store(double* p, D x) {
    _mm256_storeu_pd(p, x.a);
    _mm256_storeu_pd(p + 4, x.b);
    _mm256_storeu_pd(p + 8, x.c);
    _mm256_storeu_pd(p + 12, x.d);
  }
  static D d_from_f(F x) {
    return {_mm256_cvtps_pd(_mm256_castps256_ps128(x.a)), _mm256_cvtps_pd(_mm256_extractf128_ps(x.a, 1)),
            _mm256_cvtps_pd(_mm256_castps256_ps128(x.b)), _mm256_cvtps_pd(_mm256_extractf128_ps(x.b, 1))};
  }
  static F d_to_f(D x) {
    const __m256 lo = _mm256_set_m128(_mm256_cvtpd_ps(x.b), _mm256_cvtpd_ps(x.a));
    const __m256 hi = _mm256_set_m128(_mm256_cvtpd_ps(x.d), _mm256_cvtpd_ps(x.c));
    return {lo, hi};
  }
  static D d_add(D x, D y) {
    return {_mm256_add_pd(x.a, y.a), _mm256_add_pd(x.b, y.b), _mm256_add_pd(x.c, y.c), _mm256_add_pd(x.d, y.d)};
  }
  static D d_sub(D x, D y) {
    return {_mm256_sub_pd(x.a, y.a), _mm256_sub_pd(x.b, y.b), _mm256_sub_pd(x.c, y.c), _mm256_sub_pd(x.d, y.d)};
  }
  static D d_mul(D x, D y) {
    return {_mm256_mul_pd(x.a, y.a), _mm256_mul_pd(x.b, y.b), _mm256_mul_pd(x.c, y.c), _mm256_mul_pd(x.d, y.d)};
  }
  static std::uint32_t d_abs_ge_bits(D x, D threshold) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    const auto m = [&](__m256d v, __m256d t) {
      return static_cast<std::uint32_t>(_mm256_movemask_pd(_mm256_cmp_pd(_mm256_andnot_pd(sign, v), t, _CMP_GE_OQ)));
    };
    return m(x.a, threshold.a) | (m(x.b, threshold.b) << 4) | (m(x.c, threshold.c) << 8) |
           (m(x.d, threshold.d) << 12);
  }
};

}  // namespace etsim::kernel
