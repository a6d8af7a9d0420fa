// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mtm::simd {

enum class Isa { Scalar, Avx2, Neon };

// Inner loops with a scalar reference and vector variants. Every variant
// performs the same IEEE operations in the same order, so results are
// bit-identical across variants (the kernel sources are built with
// floating-point contraction disabled).
struct Kernels {
  Isa isa;

  // out[s] = number of eigenvalues below shifts[s] of the symmetric
  // tridiagonal with diagonal diag[0..m) and squared off-diagonal off_sq[0..m-1).
  void (*sturm_counts)(const double* diag, const double* off_sq, std::size_t m, double pivmin,
                       const double* shifts, std::size_t count, std::uint32_t* out);

  // acc[i] += scale * |spec[i]|^2
  void (*accumulate_power)(double* acc, const std::complex<double>* spec, std::size_t len,
                           double scale);

  // out[i] = x[i] * taper[i]
  void (*modulate)(const std::complex<double>* x, const double* taper, std::complex<double>* out,
                   std::size_t n);

  // out[b] = sum_j a[j] * z[j][b] for b in [0, lanes); z is stored as
  // z_re[j * lanes + b]. Sums run in increasing j for every lane.
  void (*row_dot_lanes)(const double* a_re, const double* a_im, std::size_t len,
                        const double* z_re, const double* z_im, std::size_t lanes, double* out_re,
                        double* out_im);

  // One fixed-point sweep of the adaptive weights at every frequency:
  // next = sum_k a_k S_k / sum_k a_k with a_k = lam_k s^2 / (lam_k s + (1 - lam_k) sigma2)^2.
  // spectra holds k rows of length len with the given stride.
  void (*adaptive_sweep)(const double* spectra, std::size_t k, std::size_t stride,
                         const double* lambda, const double* one_minus_lambda, double sigma2,
                         const double* current, double* next, std::size_t len);
};

const Kernels& kernels();

// nullptr when the variant is not compiled in or the CPU lacks it.
const Kernels* kernels_for(Isa isa);

std::vector<Isa> available_isas();
std::string_view isa_name(Isa isa);

namespace detail {
const Kernels& scalar_kernels();
const Kernels* avx2_kernels();
const Kernels* neon_kernels();
}  // namespace detail

}  // namespace mtm::simd
