// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mtm {

using cplx = std::complex<double>;

// Statistics of S over a closed frequency interval.
struct IntervalStats {
  double min = 0.0;   // essential minimum
  double max = 0.0;   // essential maximum
  double mean = 0.0;
  double rms = 0.0;
  // bound on |S''| when S is twice differentiable across the interval
  std::optional<double> curvature;
};

// A 1-periodic power spectral density.
class PsdModel {
 public:
  virtual ~PsdModel() = default;

  virtual double value(double f) const = 0;
  // r(lag) = integral over one period of S(f) exp(j 2 pi f lag)
  virtual cplx autocorrelation(std::int64_t lag) const = 0;
  virtual double total_power() const = 0;
  virtual double global_max() const = 0;
  virtual IntervalStats interval_stats(double center, double half_width) const = 0;
};

struct PsdPiece {
  double start = 0.0;
  double end = 0.0;
  double level = 0.0;
};

// Piecewise-constant PSD. Piece i spans [breakpoints[i], breakpoints[i+1]);
// the last piece wraps around to breakpoints[0] + 1. Adjacent pieces with
// equal levels are merged so every stored breakpoint is a genuine jump.
class PiecewisePsd : public PsdModel {
 public:
  PiecewisePsd(std::vector<double> breakpoints, std::vector<double> levels);

  // Pieces inside [0, 1] over a constant background.
  static PiecewisePsd from_pieces(const std::vector<PsdPiece>& pieces, double background);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& levels() const { return levels_; }
  std::size_t piece_count() const { return levels_.size(); }

  double value(double f) const override;
  cplx autocorrelation(std::int64_t lag) const override;
  double total_power() const override;
  double global_max() const override;
  IntervalStats interval_stats(double center, double half_width) const override;

 private:
  double piece_start(std::size_t i) const { return breakpoints_[i]; }
  double piece_end(std::size_t i) const {
    return i + 1 < breakpoints_.size() ? breakpoints_[i + 1] : breakpoints_[0] + 1.0;
  }

  std::vector<double> breakpoints_;
  std::vector<double> levels_;
};

// Smooth positive PSD given pointwise. The autocorrelation comes from a
// periodic trapezoid rule evaluated with one FFT of length quadrature_points.
class SmoothPsd : public PsdModel {
 public:
  SmoothPsd(std::function<double(double)> fn, std::string description,
            std::size_t quadrature_points = std::size_t{1} << 20);

  const std::string& description() const { return description_; }

  double value(double f) const override;
  cplx autocorrelation(std::int64_t lag) const override;
  double total_power() const override;
  double global_max() const override;
  IntervalStats interval_stats(double center, double half_width) const override;

 private:
  std::function<double(double)> fn_;
  std::string description_;
  std::vector<cplx> acf_;
  double max_ = 0.0;
};

// log10 S(f) = base + sum_i height_i * exp(kappa_i (cos 2 pi (f - center_i) - 1)),
// kappa_i = 1 / (2 pi width_i)^2: periodic Gaussian-like bumps in decibel space.
struct LogBump {
  double center = 0.0;
  double width = 0.0;
  double height = 0.0;
};

SmoothPsd log_bump_psd(const std::vector<LogBump>& bumps, double base = 0.0);

// Four narrowband sources over a unit background: 1e3 on [0.18, 0.22],
// 1e9 on [0.28, 0.32], 1e2 on [0.38, 0.42], 10 on [0.78, 0.82].
PiecewisePsd multiband_fixture();

PiecewisePsd flat_psd(double level);

// Bumps used for the eight-method comparison at n = 2^15.
SmoothPsd comparison_fixture();

}  // namespace mtm
