// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mtm/psd.hpp"

namespace mtm {

using cplx = std::complex<double>;

cplx autocorrelation(const PsdModel& psd, std::int64_t lag);

struct SamplerOptions {
  std::size_t dense_limit = 4096;
  double clamp_tolerance = 1e-8;  // relative to the largest embedding eigenvalue
};

// Draws x ~ CN(0, R) with R[m][k] = r(m - k). The default route is a
// circulant embedding of length 2n; spectra whose embedding is not
// nonnegative fall back to a dense factor of R (Cholesky, or an eigenvalue
// square root if R is singular).
//
// Draw i uses the Philox stream (key = seed, stream = i): white variates
// z_j = stream.complex_normal(j), so each draw is reproducible on its own.
class ProcessSampler {
 public:
  enum class Route { Circulant, DenseCholesky, DenseEigen };

  ProcessSampler(const PsdModel& psd, std::size_t n, std::uint64_t seed, SamplerOptions opts = {});

  std::size_t n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  Route route() const { return route_; }

  // Smallest over largest embedding eigenvalue before clamping.
  double embedding_min_ratio() const { return min_ratio_; }
  std::span<const double> embedding_spectrum() const { return spectrum_; }
  std::span<const cplx> covariance_column() const { return r_; }

  // Covariance E[x_i conj(x_j)] implied by the factorization.
  cplx implied_covariance(std::size_t i, std::size_t j) const;

  std::vector<cplx> draw_one(std::uint64_t index) const;
  std::vector<std::vector<cplx>> draw(std::uint64_t first, std::size_t count) const;

 private:
  std::vector<std::vector<cplx>> draw_dense(std::uint64_t first, std::size_t count) const;

  std::size_t n_;
  std::uint64_t seed_;
  Route route_ = Route::Circulant;
  std::vector<cplx> r_;
  std::vector<double> spectrum_;
  std::vector<double> sqrt_spectrum_;
  double min_ratio_ = 0.0;
  // dense factor rows: row i occupies [offset_[i], offset_[i] + length_[i])
  std::vector<double> factor_re_, factor_im_;
  std::vector<std::size_t> offset_, length_;
};

ProcessSampler build_sampler(const PsdModel& psd, std::size_t n, std::uint64_t seed);

// Draws 0 .. count-1.
std::vector<std::vector<cplx>> draw(const ProcessSampler& sampler, std::size_t count);

}  // namespace mtm
