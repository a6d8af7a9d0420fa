// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <immintrin.h>

#include <algorithm>

#include "mtm/simd.hpp"

namespace mtm::simd {
namespace {

void sturm_counts(const double* diag, const double* off_sq, std::size_t m, double pivmin,
                  const double* shifts, std::size_t count, std::uint32_t* out) {
  const __m256d piv = _mm256_set1_pd(pivmin);
  const __m256d neg_piv = _mm256_set1_pd(-pivmin);
  std::size_t s = 0;
  for (; s + 4 <= count; s += 4) {
    const __m256d x = _mm256_loadu_pd(shifts + s);
    __m256i cnt = _mm256_setzero_si256();
    __m256d q = _mm256_sub_pd(_mm256_set1_pd(diag[0]), x);
    __m256d le = _mm256_cmp_pd(q, piv, _CMP_LE_OQ);
    q = _mm256_blendv_pd(q, _mm256_min_pd(q, neg_piv), le);
    cnt = _mm256_sub_epi64(cnt, _mm256_castpd_si256(le));
    for (std::size_t i = 1; i < m; ++i) {
      __m256d t = _mm256_sub_pd(_mm256_set1_pd(diag[i]), x);
      q = _mm256_sub_pd(t, _mm256_div_pd(_mm256_set1_pd(off_sq[i - 1]), q));
      le = _mm256_cmp_pd(q, piv, _CMP_LE_OQ);
      q = _mm256_blendv_pd(q, _mm256_min_pd(q, neg_piv), le);
      cnt = _mm256_sub_epi64(cnt, _mm256_castpd_si256(le));
    }
    alignas(32) std::int64_t c[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(c), cnt);
    for (int j = 0; j < 4; ++j) out[s + j] = static_cast<std::uint32_t>(c[j]);
  }
  if (s < count) detail::scalar_kernels().sturm_counts(diag, off_sq, m, pivmin, shifts + s,
                                                       count - s, out + s);
}

void accumulate_power(double* acc, const std::complex<double>* spec, std::size_t len,
                      double scale) {
  const double* p = reinterpret_cast<const double*>(spec);
  const __m256d sc = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d v0 = _mm256_loadu_pd(p + 2 * i);
    __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);
    __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    // hadd interleaves: [p0, p2, p1, p3]
    __m256d pw = _mm256_permute4x64_pd(h, 0b11011000);
    __m256d a = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a, _mm256_mul_pd(sc, pw)));
  }
  if (i < len) detail::scalar_kernels().accumulate_power(acc + i, spec + i, len - i, scale);
}

void modulate(const std::complex<double>* x, const double* taper, std::complex<double>* out,
              std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* po = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m128d t2 = _mm_loadu_pd(taper + i);
    __m256d t = _mm256_permute4x64_pd(_mm256_castpd128_pd256(t2), 0b01010000);
    _mm256_storeu_pd(po + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(px + 2 * i), t));
  }
  if (i < n) detail::scalar_kernels().modulate(x + i, taper + i, out + i, n - i);
}

void row_dot_lanes(const double* a_re, const double* a_im, std::size_t len, const double* z_re,
                   const double* z_im, std::size_t lanes, double* out_re, double* out_im) {
  std::size_t b = 0;
  for (; b + 8 <= lanes; b += 8) {
    __m256d r0 = _mm256_setzero_pd(), r1 = _mm256_setzero_pd();
    __m256d i0 = _mm256_setzero_pd(), i1 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < len; ++j) {
      const __m256d ar = _mm256_set1_pd(a_re[j]);
      const __m256d ai = _mm256_set1_pd(a_im[j]);
      const double* zr = z_re + j * lanes + b;
      const double* zi = z_im + j * lanes + b;
      __m256d zr0 = _mm256_loadu_pd(zr), zr1 = _mm256_loadu_pd(zr + 4);
      __m256d zi0 = _mm256_loadu_pd(zi), zi1 = _mm256_loadu_pd(zi + 4);
      r0 = _mm256_add_pd(r0, _mm256_sub_pd(_mm256_mul_pd(ar, zr0), _mm256_mul_pd(ai, zi0)));
      r1 = _mm256_add_pd(r1, _mm256_sub_pd(_mm256_mul_pd(ar, zr1), _mm256_mul_pd(ai, zi1)));
      i0 = _mm256_add_pd(i0, _mm256_add_pd(_mm256_mul_pd(ar, zi0), _mm256_mul_pd(ai, zr0)));
      i1 = _mm256_add_pd(i1, _mm256_add_pd(_mm256_mul_pd(ar, zi1), _mm256_mul_pd(ai, zr1)));
    }
    _mm256_storeu_pd(out_re + b, r0);
    _mm256_storeu_pd(out_re + b + 4, r1);
    _mm256_storeu_pd(out_im + b, i0);
    _mm256_storeu_pd(out_im + b + 4, i1);
  }
  for (; b + 4 <= lanes; b += 4) {
    __m256d r0 = _mm256_setzero_pd(), i0 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < len; ++j) {
      const __m256d ar = _mm256_set1_pd(a_re[j]);
      const __m256d ai = _mm256_set1_pd(a_im[j]);
      __m256d zr0 = _mm256_loadu_pd(z_re + j * lanes + b);
      __m256d zi0 = _mm256_loadu_pd(z_im + j * lanes + b);
      r0 = _mm256_add_pd(r0, _mm256_sub_pd(_mm256_mul_pd(ar, zr0), _mm256_mul_pd(ai, zi0)));
      i0 = _mm256_add_pd(i0, _mm256_add_pd(_mm256_mul_pd(ar, zi0), _mm256_mul_pd(ai, zr0)));
    }
    _mm256_storeu_pd(out_re + b, r0);
    _mm256_storeu_pd(out_im + b, i0);
  }
  // leftover lanes: same sums, one lane at a time
  for (; b < lanes; ++b) {
    double acc_re = 0.0, acc_im = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
      double zr = z_re[j * lanes + b], zi = z_im[j * lanes + b];
      acc_re = acc_re + (a_re[j] * zr - a_im[j] * zi);
      acc_im = acc_im + (a_re[j] * zi + a_im[j] * zr);
    }
    out_re[b] = acc_re;
    out_im[b] = acc_im;
  }
}

void adaptive_sweep(const double* spectra, std::size_t k, std::size_t stride, const double* lambda,
                    const double* one_minus_lambda, double sigma2, const double* current,
                    double* next, std::size_t len) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d sig = _mm256_set1_pd(sigma2);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d s = _mm256_loadu_pd(current + i);
    __m256d num = zero, den = zero;
    for (std::size_t j = 0; j < k; ++j) {
      __m256d ls = _mm256_mul_pd(_mm256_set1_pd(lambda[j]), s);
      __m256d t = _mm256_add_pd(ls, _mm256_mul_pd(_mm256_set1_pd(one_minus_lambda[j]), sig));
      __m256d tt = _mm256_mul_pd(t, t);
      __m256d a = _mm256_div_pd(_mm256_mul_pd(ls, s), tt);
      a = _mm256_blendv_pd(zero, a, _mm256_cmp_pd(tt, zero, _CMP_GT_OQ));
      num = _mm256_add_pd(num, _mm256_mul_pd(a, _mm256_loadu_pd(spectra + j * stride + i)));
      den = _mm256_add_pd(den, a);
    }
    __m256d r = _mm256_div_pd(num, den);
    _mm256_storeu_pd(next + i, _mm256_blendv_pd(zero, r, _mm256_cmp_pd(den, zero, _CMP_GT_OQ)));
  }
  if (i < len)
    detail::scalar_kernels().adaptive_sweep(spectra + i, k, stride, lambda, one_minus_lambda,
                                            sigma2, current + i, next + i, len - i);
}

const Kernels kAvx2{Isa::Avx2, sturm_counts, accumulate_power, modulate, row_dot_lanes,
                    adaptive_sweep};

}  // namespace

namespace detail {
const Kernels* avx2_kernels() { return &kAvx2; }
}  // namespace detail

}  // namespace mtm::simd
