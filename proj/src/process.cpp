// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/process.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"
#include "mtm/rng.hpp"
#include "mtm/simd.hpp"

namespace mtm {
namespace {

constexpr std::size_t kLanes = 16;

}  // namespace

cplx autocorrelation(const PsdModel& psd, std::int64_t lag) { return psd.autocorrelation(lag); }

ProcessSampler::ProcessSampler(const PsdModel& psd, std::size_t n, std::uint64_t seed,
                               SamplerOptions opts)
    : n_(n), seed_(seed) {
  if (n == 0) throw ParameterError("sampler needs n >= 1");
  r_.resize(n);
  for (std::size_t d = 0; d < n; ++d) r_[d] = psd.autocorrelation(static_cast<std::int64_t>(d));

  const std::size_t len = 2 * n;
  std::vector<cplx> c(len, cplx{});
  for (std::size_t d = 0; d < n; ++d) c[d] = r_[d];
  for (std::size_t d = 1; d < n; ++d) c[len - d] = std::conj(r_[d]);
  fft::forward(c);
  spectrum_.resize(len);
  double mx = c[0].real(), mn = c[0].real();
  for (std::size_t j = 0; j < len; ++j) {
    spectrum_[j] = c[j].real();
    mx = std::max(mx, spectrum_[j]);
    mn = std::min(mn, spectrum_[j]);
  }
  min_ratio_ = mx > 0.0 ? mn / mx : 0.0;

  if (mn >= -opts.clamp_tolerance * mx) {
    route_ = Route::Circulant;
    sqrt_spectrum_.resize(len);
    for (std::size_t j = 0; j < len; ++j) sqrt_spectrum_[j] = std::sqrt(std::max(spectrum_[j], 0.0));
    return;
  }

  if (n > opts.dense_limit)
    throw NumericalError("circulant embedding of this spectrum is not nonnegative (min/max = " +
                         std::to_string(min_ratio_) + ") and n = " + std::to_string(n) +
                         " exceeds the dense fallback limit " + std::to_string(opts.dense_limit) +
                         "; use a smaller n or sample the spectrum directly");

  std::vector<cplx> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = i >= j ? r_[i - j] : std::conj(r_[j - i]);

  offset_.resize(n);
  length_.resize(n);
  std::vector<cplx> chol = a;
  lapack_int info = LAPACKE_zpotrf(LAPACK_ROW_MAJOR, 'L', static_cast<lapack_int>(n), chol.data(),
                                   static_cast<lapack_int>(n));
  if (info == 0) {
    route_ = Route::DenseCholesky;
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) {
      offset_[i] = off;
      length_[i] = i + 1;
      off += i + 1;
    }
    factor_re_.resize(off);
    factor_im_.resize(off);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        factor_re_[offset_[i] + j] = chol[i * n + j].real();
        factor_im_[offset_[i] + j] = chol[i * n + j].imag();
      }
    return;
  }

  // singular R: symmetric square root V sqrt(D)
  std::vector<double> eig(n);
  info = LAPACKE_zheevd(LAPACK_ROW_MAJOR, 'V', 'L', static_cast<lapack_int>(n), a.data(),
                        static_cast<lapack_int>(n), eig.data());
  if (info != 0) throw NumericalError("dense covariance eigendecomposition failed");
  route_ = Route::DenseEigen;
  factor_re_.resize(n * n);
  factor_im_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    offset_[i] = i * n;
    length_[i] = n;
    for (std::size_t j = 0; j < n; ++j) {
      double s = std::sqrt(std::max(eig[j], 0.0));
      factor_re_[i * n + j] = a[i * n + j].real() * s;
      factor_im_[i * n + j] = a[i * n + j].imag() * s;
    }
  }
}

cplx ProcessSampler::implied_covariance(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw ParameterError("covariance index out of range");
  if (route_ == Route::Circulant) {
    const std::size_t len = spectrum_.size();
    const std::size_t d = (i + len - j) % len;
    cplx acc{};
    for (std::size_t q = 0; q < len; ++q) {
      double ph = 2.0 * 3.14159265358979323846 * static_cast<double>((q * d) % len) / static_cast<double>(len);
      acc += std::max(spectrum_[q], 0.0) * cplx(std::cos(ph), std::sin(ph));
    }
    return acc / static_cast<double>(len);
  }
  std::size_t len = std::min(length_[i], length_[j]);
  cplx acc{};
  for (std::size_t q = 0; q < len; ++q) {
    cplx a(factor_re_[offset_[i] + q], factor_im_[offset_[i] + q]);
    cplx b(factor_re_[offset_[j] + q], factor_im_[offset_[j] + q]);
    acc += a * std::conj(b);
  }
  return acc;
}

std::vector<cplx> ProcessSampler::draw_one(std::uint64_t index) const {
  return std::move(draw(index, 1).front());
}

std::vector<std::vector<cplx>> ProcessSampler::draw(std::uint64_t first, std::size_t count) const {
  if (route_ != Route::Circulant) return draw_dense(first, count);
  const std::size_t len = sqrt_spectrum_.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(len));
  std::vector<std::vector<cplx>> out(count);
  std::vector<cplx> buf(len);
  for (std::size_t c = 0; c < count; ++c) {
    CounterStream stream(seed_, first + c);
    for (std::size_t j = 0; j < len; ++j) buf[j] = sqrt_spectrum_[j] * stream.complex_normal(j);
    fft::backward(buf);
    out[c].resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out[c][i] = buf[i] * scale;
  }
  return out;
}

std::vector<std::vector<cplx>> ProcessSampler::draw_dense(std::uint64_t first, std::size_t count) const {
  std::vector<std::vector<cplx>> out(count, std::vector<cplx>(n_));
  const auto& kern = simd::kernels();
  std::vector<double> z_re, z_im;
  double row_re[kLanes], row_im[kLanes];
  for (std::size_t start = 0; start < count; start += kLanes) {
    const std::size_t lanes = std::min(kLanes, count - start);
    z_re.assign(n_ * lanes, 0.0);
    z_im.assign(n_ * lanes, 0.0);
    for (std::size_t b = 0; b < lanes; ++b) {
      CounterStream stream(seed_, first + start + b);
      for (std::size_t j = 0; j < n_; ++j) {
        cplx z = stream.complex_normal(j);
        z_re[j * lanes + b] = z.real();
        z_im[j * lanes + b] = z.imag();
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      kern.row_dot_lanes(factor_re_.data() + offset_[i], factor_im_.data() + offset_[i], length_[i],
                         z_re.data(), z_im.data(), lanes, row_re, row_im);
      for (std::size_t b = 0; b < lanes; ++b) out[start + b][i] = {row_re[b], row_im[b]};
    }
  }
  return out;
}

ProcessSampler build_sampler(const PsdModel& psd, std::size_t n, std::uint64_t seed) {
  return ProcessSampler(psd, n, seed);
}

std::vector<std::vector<cplx>> draw(const ProcessSampler& sampler, std::size_t count) {
  if (count < 1) throw ParameterError("draw count must be at least 1");
  return sampler.draw(0, count);
}

}  // namespace mtm
