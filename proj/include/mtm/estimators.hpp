// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mtm/dpss.hpp"
#include "mtm/psd.hpp"

namespace mtm {

struct FrequencyGrid {
  std::size_t l = 0;
  double frequency(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(l); }
};

enum class Method { Periodogram, Single, Multitaper, MultitaperApprox, Adaptive };

std::string_view method_name(Method m);

struct EstimateMeta {
  std::size_t n = 0;
  double w = 0.0;
  std::size_t k = 0;
  std::optional<double> epsilon;
  std::uint64_t fft_count = 0;        // transforms executed
  double fft_length_equivalents = 0;  // transform points divided by l
};

struct SpectralEstimate {
  FrequencyGrid grid;
  std::vector<double> values;
  Method method = Method::Periodogram;
  EstimateMeta meta;
};

struct AdaptiveOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
};

struct AdaptiveResult {
  SpectralEstimate estimate;
  std::vector<double> weights;  // k rows of length l
  std::size_t iterations = 0;
  bool converged = false;

  double weight(std::size_t taper, std::size_t bin) const { return weights[taper * estimate.grid.l + bin]; }
};

SpectralEstimate periodogram(std::span<const cplx> x, std::size_t l);

SpectralEstimate tapered_periodogram(std::span<const cplx> x, std::span<const double> taper,
                                     std::size_t l);

SpectralEstimate multitaper_exact(std::span<const cplx> x, const TaperBank& bank, std::size_t k,
                                  std::size_t l);

std::vector<double> spectral_window(const TaperBank& bank, std::size_t k, std::size_t l);

// Row i holds the tapered periodogram with taper i, for i < k.
std::vector<double> single_taper_spectra(std::span<const cplx> x, const TaperBank& bank,
                                         std::size_t k, std::size_t l);

AdaptiveResult adaptive_multitaper(std::span<const cplx> x, const TaperBank& bank, std::size_t k,
                                   std::size_t l, AdaptiveOptions opts = {});

// Same, with the eigenvalues used in the weights supplied explicitly.
AdaptiveResult adaptive_multitaper(std::span<const cplx> x, const TaperBank& bank,
                                   std::span<const double> eigenvalues, std::size_t k,
                                   std::size_t l, AdaptiveOptions opts = {});

// Multitaper estimate at an arbitrary frequency by direct summation.
double multitaper_at(std::span<const cplx> x, const TaperBank& bank, std::size_t k, double f);

// |10 log10(estimate / truth)| per grid frequency, +inf where the estimate
// vanishes but the truth does not.
std::vector<double> mean_log_deviation(const SpectralEstimate& estimate, const PsdModel& truth);
std::vector<double> mean_log_deviation(std::span<const double> estimate, std::span<const double> truth);

}  // namespace mtm
