// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <vector>

namespace mtm {

using cplx = std::complex<double>;

// The n x n prolate matrix B[m][k] = sin(2 pi w (m-k)) / (pi (m-k)), 2w on the
// diagonal, applied in O(n log n) through a circulant embedding of length 2n.
class ProlateKernel {
 public:
  ProlateKernel(std::size_t n, double w);

  std::size_t n() const { return n_; }
  double w() const { return w_; }
  std::span<const double> first_column() const { return column_; }
  double entry(std::size_t row, std::size_t col) const;

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<cplx> apply(std::span<const cplx> v) const;

  // v^T B v for a real vector.
  double quadratic_form(std::span<const double> v) const;

 private:
  std::size_t n_;
  double w_;
  std::vector<double> column_;
  std::vector<double> embed_spectrum_;  // real: the embedding is symmetric
};

std::vector<double> apply_prolate(const ProlateKernel& kernel, std::span<const double> v);
std::vector<cplx> apply_prolate(const ProlateKernel& kernel, std::span<const cplx> v);

// Consecutive Slepian tapers [first_index, first_index + count) for fixed (n, w),
// stored column-major.
struct TaperBank {
  std::size_t n = 0;
  double w = 0.0;
  std::size_t first_index = 0;
  std::vector<double> eigenvalues;
  std::vector<double> data;
  // set when 2nw <= 1: the concentration problem has no well-concentrated taper
  bool narrow_band = false;

  std::size_t k_computed() const { return eigenvalues.size(); }
  std::span<const double> taper(std::size_t local) const {
    return std::span<const double>(data).subspan(local * n, n);
  }
  // Index relative to taper 0 of the full sequence.
  bool holds(std::size_t index) const {
    return index >= first_index && index < first_index + k_computed();
  }
  std::span<const double> taper_at(std::size_t index) const { return taper(index - first_index); }
  double eigenvalue_at(std::size_t index) const { return eigenvalues[index - first_index]; }
};

struct Slepian {
  std::vector<double> taper;
  double eigenvalue = 0.0;
};

// Selected Slepian pairs on demand. The commuting tridiagonal is split into
// its even and odd halves; taper 2j is the j-th eigenvector (descending) of
// the even half and taper 2j+1 that of the odd half. Each pair costs a
// bisection, an inverse iteration, and one FFT Rayleigh quotient.
class DpssSolver {
 public:
  DpssSolver(std::size_t n, double w);

  std::size_t n() const { return n_; }
  double w() const { return w_; }
  const ProlateKernel& kernel() const { return kernel_; }

  Slepian compute(std::size_t k) const;

  // Pairs first..first+count-1; bisection is batched across shifts.
  std::vector<Slepian> compute_range(std::size_t first, std::size_t count) const;

  // Memoized eigenvalue of taper k (computes the taper once).
  double eigenvalue(std::size_t k) const;

  struct Half {
    std::vector<double> diag;
    std::vector<double> off;
    std::vector<double> off_sq;
    double lower = 0.0, upper = 0.0;  // Gershgorin interval
    double pivmin = 0.0;
    double norm = 0.0;
  };

 private:
  std::vector<double> bisect(const Half& h, std::span<const std::size_t> ranks) const;
  std::vector<double> inverse_iteration(const Half& h, double mu, std::size_t k) const;
  std::vector<double> expand(std::span<const double> u, bool even) const;
  Slepian finish(std::vector<double> v) const;

  std::size_t n_;
  double w_;
  ProlateKernel kernel_;
  Half even_, odd_;
  mutable std::mutex memo_mu_;
  mutable std::map<std::size_t, double> memo_;
};

// First k_max tapers. Deterministic for any worker count.
TaperBank build_taper_bank(std::size_t n, double w, std::size_t k_max);

// Tapers [first, first + count) from an existing solver.
TaperBank build_taper_bank(const DpssSolver& solver, std::size_t first, std::size_t count);

// Bounds on the eigenvalue distribution (natural logarithms).
double transition_width_bound(std::size_t n, double w, double eps);
double eigenvalue_lower_bound(std::size_t n, double w, std::size_t k);

// Largest K with lambda_{K-1} >= 1 - delta, 0 if lambda_0 < 1 - delta.
std::size_t select_num_tapers(std::size_t n, double w, double delta);
std::size_t select_num_tapers(const DpssSolver& solver, double delta);

// floor(2nw) robust to products like 2000 * 0.01 landing just below an integer.
std::size_t floor_2nw(std::size_t n, double w);

// Clamp applied to computed eigenvalues so they stay in the open unit interval.
double clamp_eigenvalue(double lambda);

void write_bank(const std::filesystem::path& path, const TaperBank& bank);
TaperBank read_bank(const std::filesystem::path& path);

void validate_bandwidth(double w);

}  // namespace mtm
