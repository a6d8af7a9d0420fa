// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mtm/dpss.hpp"
#include "mtm/estimators.hpp"

namespace mtm {

// Sinc samples of the prolate matrix wrapped onto a length-l circle:
// b[0] = 2w, b[m] = b[l-m] = sin(2 pi w m) / (pi m) for 1 <= m < n, zero between.
struct SincKernelExt {
  std::size_t n = 0;
  double w = 0.0;
  std::size_t l = 0;
  std::vector<double> b;
};

SincKernelExt build_sinc_kernel(std::size_t n, double w, std::size_t l);

// Psi(j/l) = sum over all n tapers of lambda_k * S_k(j/l), computed without
// tapers as x^* E_f B E_f^* x: transform, square, inverse transform, weight
// the lags by b, transform back. Grids with l < 2n are evaluated on 2l points
// and decimated.
std::vector<double> psi_weighted_sum(std::span<const cplx> x, double w, std::size_t l);

// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
};

// With K tapers and tolerance eps:
//   i1 = {i < K : lambda_i >= 1 - eps}    i2 = {i < K : eps < lambda_i < 1 - eps}
//   i3 = {i >= K : eps < lambda_i < 1 - eps}  i4 = {i >= K : lambda_i <= eps}
// Monotone eigenvalues make each set a contiguous range.
struct IndexPartition {
  std::size_t n = 0;
  std::size_t k = 0;
  double epsilon = 0.0;
  IndexRange i1, i2, i3, i4;

  IndexRange transition() const { return {i2.begin, i3.end}; }
  std::size_t transition_count() const { return i2.size() + i3.size(); }
};

// eigenvalues[i] = lambda_i, listed at least through the first index >= k
// with lambda <= eps (or through n - 1).
IndexPartition partition_indices(std::span<const double> eigenvalues, std::size_t n, std::size_t k,
                                 double eps);

// Partition plus the transition tapers, found by searching the monotone
// eigenvalue sequence so that only O(log n) eigenvalues outside the
// transition band are ever computed.
struct TransitionPlan {
  IndexPartition partition;
  TaperBank transition;
};

TransitionPlan plan_transition(const DpssSolver& solver, std::size_t k, double eps);

SpectralEstimate multitaper_approx(std::span<const cplx> x, const TaperBank& transition,
                                   const IndexPartition& partition, double w, std::size_t k,
                                   std::size_t l);

}  // namespace mtm
