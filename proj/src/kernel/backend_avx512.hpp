#pragma once

// 16-lane backend on AVX-512F: one zmm register per uint32/float pack, two
// per double pack. Only compiled into the translation unit built with
// -mavx512f; keep standard-library templates out of this header.

#include <immintrin.h>

#include <cstdint>

#include "etsim/kernel.hpp"

namespace etsim::kernel {

struct Avx512 {
  using U = __m512i;
  using F = __m512;
  struct D {
    __m512d lo, hi;
  };

  static U u_set1(std::uint32_t v) { return _mm512_set1_epi32(static_cast<int>(v)); }
  static U u_lane_index() { return _mm512_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15); }
  static U u_add(U x, U y) { return _mm512_add_epi32(x, y); }
  static U u_sub(U x, U y) { return _mm512_sub_epi32(x, y); }
  static U u_xor(U x, U y) { return _mm512_xor_si512(x, y); }
  static U u_and(U x, U y) { return _mm512_and_si512(x, y); }
  static U u_or(U x, U y) { return _mm512_or_si512(x, y); }
  template <int N> static U u_srli(U x) { return _mm512_srli_epi32(x, N); }
  template <int N> static U u_slli(U x) { return _mm512_slli_epi32(x, N); }
  static U u_lt_i32(U x, U y) { return _mm512_maskz_mov_epi32(_mm512_cmplt_epi32_mask(x, y), _mm512_set1_epi32(-1)); }
  static U u_blend(U mask, U x, U y) { return u_xor(y, u_and(u_xor(x, y), mask)); }

  static void mulhilo(U x, std::uint32_t m, U& lo, U& hi) {
    const __m512i mv = _mm512_set1_epi32(static_cast<int>(m));
    const __m512i even = _mm512_mul_epu32(x, mv);
    const __m512i odd = _mm512_mul_epu32(_mm512_srli_epi64(x, 32), mv);
    hi = _mm512_mask_blend_epi32(0xAAAA, _mm512_srli_epi64(even, 32), odd);
    lo = _mm512_mask_blend_epi32(0xAAAA, even, _mm512_slli_epi64(odd, 32));
  }

  static F f_set1(float v) { return _mm512_set1_ps(v); }
  static F f_add(F x, F y) { return _mm512_add_ps(x, y); }
  static F f_sub(F x, F y) { return _mm512_sub_ps(x, y); }
  static F f_mul(F x, F y) { return _mm512_mul_ps(x, y); }
  static F f_max(F x, F y) { return _mm512_max_ps(x, y); }
  static F f_sqrt(F x) { return _mm512_sqrt_ps(x); }
  static F f_from_i32(U x) { return _mm512_cvtepi32_ps(x); }
  static U f_as_u(F x) { return _mm512_castps_si512(x); }
  static F u_as_f(U x) { return _mm512_castsi512_ps(x); }
  static std::uint32_t f_lt_bits(F x, F y) { return _mm512_cmp_ps_mask(x, y, _CMP_LT_OQ); }

  static D d_set1(double v) {
    const __m512d x = _mm512_set1_pd(v);
    return {x, x};
  }
  static D d_load(const double* p) { return {_mm512_loadu_pd(p), _mm512_loadu_pd(p + 8)}; }
  static void d_store(double* p, D x) {
    _mm512_storeu_pd(p, x.lo);
    _mm512_storeu_pd(p + 8, x.hi);
  }
  static D d_from_f(F x) {
    const __m256 lo = _mm512_castps512_ps256(x);
    const __m256 hi = _mm256_castpd_ps(_mm512_extractf64x4_pd(_mm512_castps_pd(x), 1));
    return {_mm512_cvtps_pd(lo), _mm512_cvtps_pd(hi)};
  }
  static F d_to_f(D x) {
    const __m256 lo = _mm512_cvtpd_ps(x.lo);
    const __m256 hi = _mm512_cvtpd_ps(x.hi);
    const __m512d packed =
        _mm512_insertf64x4(_mm512_castpd256_pd512(_mm256_castps_pd(lo)), _mm256_castps_pd(hi), 1);
    return _mm512_castpd_ps(packed);
  }
  static D d_add(D x, D y) { return {_mm512_add_pd(x.lo, y.lo), _mm512_add_pd(x.hi, y.hi)}; }
  static D d_sub(D x, D y) { return {_mm512_sub_pd(x.lo, y.lo), _mm512_sub_pd(x.hi, y.hi)}; }
  static D d_mul(D x, D y) { return {_mm512_mul_pd(x.lo, y.lo), _mm512_mul_pd(x.hi, y.hi)}; }
  static std::uint32_t d_abs_ge_bits(D x, D threshold) {
    const __m512d sign = _mm512_set1_pd(-0.0);
    const auto abs_lo = _mm512_castsi512_pd(_mm512_andnot_si512(_mm512_castpd_si512(sign), _mm512_castpd_si512(x.lo)));
    const auto abs_hi = _mm512_castsi512_pd(_mm512_andnot_si512(_mm512_castpd_si512(sign), _mm512_castpd_si512(x.hi)));
    const std::uint32_t lo = _mm512_cmp_pd_mask(abs_lo, threshold.lo, _CMP_GE_OQ);
    const std::uint32_t hi = _mm512_cmp_pd_mask(abs_hi, threshold.hi, _CMP_GE_OQ);
    return lo | (hi << 8);
  }
};

}  // namespace etsim::kernel
