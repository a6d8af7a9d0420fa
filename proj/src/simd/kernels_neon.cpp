// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <arm_neon.h>

#include "mtm/simd.hpp"

namespace mtm::simd {
namespace {

void sturm_counts(const double* diag, const double* off_sq, std::size_t m, double pivmin,
                  const double* shifts, std::size_t count, std::uint32_t* out) {
  const float64x2_t piv = vdupq_n_f64(pivmin);
  const float64x2_t neg_piv = vdupq_n_f64(-pivmin);
  std::size_t s = 0;
  for (; s + 2 <= count; s += 2) {
    const float64x2_t x = vld1q_f64(shifts + s);
    uint64x2_t cnt = vdupq_n_u64(0);
    float64x2_t q = vsubq_f64(vdupq_n_f64(diag[0]), x);
    uint64x2_t le = vcleq_f64(q, piv);
    q = vbslq_f64(le, vminq_f64(q, neg_piv), q);
    cnt = vsubq_u64(cnt, le);
    for (std::size_t i = 1; i < m; ++i) {
      float64x2_t t = vsubq_f64(vdupq_n_f64(diag[i]), x);
      q = vsubq_f64(t, vdivq_f64(vdupq_n_f64(off_sq[i - 1]), q));
      le = vcleq_f64(q, piv);
      q = vbslq_f64(le, vminq_f64(q, neg_piv), q);
      cnt = vsubq_u64(cnt, le);
    }
    out[s] = static_cast<std::uint32_t>(vgetq_lane_u64(cnt, 0));
    out[s + 1] = static_cast<std::uint32_t>(vgetq_lane_u64(cnt, 1));
  }
  if (s < count) detail::scalar_kernels().sturm_counts(diag, off_sq, m, pivmin, shifts + s,
                                                       count - s, out + s);
}

void accumulate_power(double* acc, const std::complex<double>* spec, std::size_t len,
                      double scale) {
  const double* p = reinterpret_cast<const double*>(spec);
  const float64x2_t sc = vdupq_n_f64(scale);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    float64x2x2_t v = vld2q_f64(p + 2 * i);  // deinterleave re / im
    float64x2_t pw = vaddq_f64(vmulq_f64(v.val[0], v.val[0]), vmulq_f64(v.val[1], v.val[1]));
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vmulq_f64(sc, pw)));
  }
  if (i < len) detail::scalar_kernels().accumulate_power(acc + i, spec + i, len - i, scale);
}

void modulate(const std::complex<double>* x, const double* taper, std::complex<double>* out,
              std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    vst1q_f64(po + 2 * i, vmulq_f64(vld1q_f64(px + 2 * i), vdupq_n_f64(taper[i])));
  }
}

void row_dot_lanes(const double* a_re, const double* a_im, std::size_t len, const double* z_re,
                   const double* z_im, std::size_t lanes, double* out_re, double* out_im) {
  std::size_t b = 0;
  for (; b + 2 <= lanes; b += 2) {
    float64x2_t r = vdupq_n_f64(0.0), im = vdupq_n_f64(0.0);
    for (std::size_t j = 0; j < len; ++j) {
      const float64x2_t ar = vdupq_n_f64(a_re[j]);
      const float64x2_t ai = vdupq_n_f64(a_im[j]);
      float64x2_t zr = vld1q_f64(z_re + j * lanes + b);
      float64x2_t zi = vld1q_f64(z_im + j * lanes + b);
      r = vaddq_f64(r, vsubq_f64(vmulq_f64(ar, zr), vmulq_f64(ai, zi)));
      im = vaddq_f64(im, vaddq_f64(vmulq_f64(ar, zi), vmulq_f64(ai, zr)));
    }
    vst1q_f64(out_re + b, r);
    vst1q_f64(out_im + b, im);
  }
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
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t sig = vdupq_n_f64(sigma2);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t s = vld1q_f64(current + i);
    float64x2_t num = zero, den = zero;
    for (std::size_t j = 0; j < k; ++j) {
      float64x2_t ls = vmulq_f64(vdupq_n_f64(lambda[j]), s);
      float64x2_t t = vaddq_f64(ls, vmulq_f64(vdupq_n_f64(one_minus_lambda[j]), sig));
      float64x2_t tt = vmulq_f64(t, t);
      float64x2_t a = vdivq_f64(vmulq_f64(ls, s), tt);
      a = vbslq_f64(vcgtq_f64(tt, zero), a, zero);
      num = vaddq_f64(num, vmulq_f64(a, vld1q_f64(spectra + j * stride + i)));
      den = vaddq_f64(den, a);
    }
    float64x2_t r = vdivq_f64(num, den);
    vst1q_f64(next + i, vbslq_f64(vcgtq_f64(den, zero), r, zero));
  }
  if (i < len)
    detail::scalar_kernels().adaptive_sweep(spectra + i, k, stride, lambda, one_minus_lambda,
                                            sigma2, current + i, next + i, len - i);
}

const Kernels kNeon{Isa::Neon, sturm_counts, accumulate_power, modulate, row_dot_lanes,
                    adaptive_sweep};

}  // namespace

namespace detail {
const Kernels* neon_kernels() { return &kNeon; }
}  // namespace detail

}  // namespace mtm::simd
