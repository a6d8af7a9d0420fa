// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "mtm/simd.hpp"

namespace mtm::simd {
namespace {

void sturm_counts(const double* diag, const double* off_sq, std::size_t m, double pivmin,
                  const double* shifts, std::size_t count, std::uint32_t* out) {
  for (std::size_t s = 0; s < count; ++s) {
    const double x = shifts[s];
    std::uint32_t neg = 0;
    double q = diag[0] - x;
    if (q <= pivmin) {
      ++neg;
      q = std::min(q, -pivmin);
    }
    for (std::size_t i = 1; i < m; ++i) {
      q = (diag[i] - x) - off_sq[i - 1] / q;
      if (q <= pivmin) {
        ++neg;
        q = std::min(q, -pivmin);
      }
    }
    out[s] = neg;
  }
}

void accumulate_power(double* acc, const std::complex<double>* spec, std::size_t len,
                      double scale) {
  const double* p = reinterpret_cast<const double*>(spec);
  for (std::size_t i = 0; i < len; ++i) {
    double re = p[2 * i], im = p[2 * i + 1];
    double pw = re * re + im * im;
    acc[i] = acc[i] + scale * pw;
  }
}

void modulate(const std::complex<double>* x, const double* taper, std::complex<double>* out,
              std::size_t n) {
  const double* px = reinterpret_cast<const double*>(x);
  double* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < n; ++i) {
    po[2 * i] = px[2 * i] * taper[i];
    po[2 * i + 1] = px[2 * i + 1] * taper[i];
  }
}

void row_dot_lanes(const double* a_re, const double* a_im, std::size_t len, const double* z_re,
                   const double* z_im, std::size_t lanes, double* out_re, double* out_im) {
  for (std::size_t b = 0; b < lanes; ++b) {
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
  for (std::size_t i = 0; i < len; ++i) {
    const double s = current[i];
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double ls = lambda[j] * s;
      double t = ls + one_minus_lambda[j] * sigma2;
      double tt = t * t;
      double a = tt > 0.0 ? (ls * s) / tt : 0.0;
      num = num + a * spectra[j * stride + i];
      den = den + a;
    }
    next[i] = den > 0.0 ? num / den : 0.0;
  }
}

const Kernels kScalar{Isa::Scalar, sturm_counts, accumulate_power, modulate, row_dot_lanes,
                      adaptive_sweep};

}  // namespace

namespace detail {
const Kernels& scalar_kernels() { return kScalar; }
}  // namespace detail

}  // namespace mtm::simd
