// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "mtm/dpss.hpp"
#include "mtm/psd.hpp"

namespace mtm {

// sigma1 = mean(1 - lambda_i), sigma2 = rms(1 - lambda_i) over the first k.
struct SigmaStats {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::size_t k = 0;
  double lambda_last = 0.0;
};

SigmaStats sigma_stats(std::span<const double> eigenvalues, std::size_t k);

// Local statistics of S over [f - w, f + w] and its global maximum.
struct LocalPsdStats {
  double f = 0.0;
  double w = 0.0;
  double m_f = 0.0;      // minimum
  double big_m_f = 0.0;  // maximum
  double a_f = 0.0;      // average
  double r_f = 0.0;      // root mean square
  double big_m = 0.0;    // global maximum
  std::optional<double> m2_f;  // bound on |S''|, only where S is smooth
};

LocalPsdStats local_psd_stats(const PsdModel& psd, double f, double w);

double bias_bound_smooth(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                         std::size_t k);
double bias_bound_general(const LocalPsdStats& stats, const SigmaStats& sig);
double variance_bound(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                      std::size_t k);
double covariance_bound(const LocalPsdStats& stats1, const LocalPsdStats& stats2,
                        const SigmaStats& sig, std::size_t n, double w, std::size_t k);
double kappa_lower_bound(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                         std::size_t k);

struct TailBounds {
  double upper = 1.0;  // P{S >= beta E S}, beta > 1
  double lower = 1.0;  // P{S <= beta E S}, beta < 1
};

TailBounds tail_probability(double kappa, double beta);

// Distance on the unit circle of frequencies.
double circular_distance(double f1, double f2);

struct BoundReport {
  std::size_t n = 0;
  double w = 0.0;
  std::size_t k = 0;
  double f = 0.0;
  SigmaStats sigma;
  LocalPsdStats stats;
  std::optional<double> bias_smooth;
  double bias_general = 0.0;
  double variance = 0.0;
  double kappa_lower = 0.0;
  bool kappa_vacuous = false;
  std::optional<double> f2;
  std::optional<double> covariance;
};

BoundReport make_bound_report(const PsdModel& psd, std::span<const double> eigenvalues,
                              std::size_t n, double w, std::size_t k, double f,
                              std::optional<double> f2 = std::nullopt);

std::string to_text(const BoundReport& report);
std::string to_json(const BoundReport& report);

// E[S_mt(f)] = (1/k) sum_i s_i^T (E_f^* R E_f) s_i for the Toeplitz covariance
// with first column r (r[d] = E[x_{m+d} conj(x_m)]), evaluated with FFTs.
double expected_multitaper(std::span<const std::complex<double>> r, const TaperBank& bank,
                           std::size_t k, double f);

}  // namespace mtm
