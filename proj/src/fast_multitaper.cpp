// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/fast_multitaper.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"
#include "mtm/simd.hpp"
#include "mtm/workspace.hpp"

namespace mtm {
namespace {

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
}

void check_standing_assumption(double lambda_last, std::optional<double> lambda_next, double eps) {
  if (!(lambda_last >= 0.5))
    throw ConfigurationError("lambda_{K-1} >= 1/2 is violated (lambda_{K-1} = " +
                             std::to_string(lambda_last) + ")");
  if (lambda_next && !(*lambda_next <= 1.0 - eps))
    throw ConfigurationError("lambda_K <= 1 - eps is violated (1 - lambda_K = " +
                             std::to_string(1.0 - *lambda_next) + ")");
}

// Psi on a grid of len >= 2n points.
void psi_on_grid(std::span<const cplx> x, double w, std::size_t len, std::span<double> out,
                 std::size_t stride) {
  const std::size_t n = x.size();
  SincKernelExt kern = build_sinc_kernel(n, w, len);
  Workspace<cplx> buf(len);
  std::copy(x.begin(), x.end(), buf.data());
  fft::forward(buf.span());
  for (std::size_t i = 0; i < len; ++i) buf[i] = std::norm(buf[i]);
  // unnormalized inverse: lag sums a(d) scaled by len
  fft::backward(buf.span());
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t i = 0; i < len; ++i) buf[i] *= kern.b[i] * scale;
  fft::forward(buf.span());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = buf[j * stride].real();
}

}  // namespace

SincKernelExt build_sinc_kernel(std::size_t n, double w, std::size_t l) {
  if (n == 0) throw ParameterError("n must be positive");
  validate_bandwidth(w);
  if (l < 2 * n) throw ParameterError("sinc kernel extension needs l >= 2n");
  SincKernelExt k;
  k.n = n;
  k.w = w;
  k.l = l;
  k.b.assign(l, 0.0);
  k.b[0] = 2.0 * w;
  for (std::size_t m = 1; m < n; ++m) {
    double v = std::sin(2.0 * std::numbers::pi * w * static_cast<double>(m)) /
               (std::numbers::pi * static_cast<double>(m));
    k.b[m] = v;
    k.b[l - m] = v;
  }
  return k;
}

std::vector<double> psi_weighted_sum(std::span<const cplx> x, double w, std::size_t l) {
  const std::size_t n = x.size();
  if (n == 0) throw ParameterError("signal must be nonempty");
  if (l < n) throw ParameterError("grid size l must be at least n");
  std::vector<double> out(l);
  if (l >= 2 * n)
    psi_on_grid(x, w, l, out, 1);
  else
    psi_on_grid(x, w, 2 * l, out, 2);
  return out;
}

IndexPartition partition_indices(std::span<const double> eigenvalues, std::size_t n, std::size_t k,
                                 double eps) {
  check_eps(eps);
  if (k < 1 || k > n) throw ParameterError("taper count must lie in [1, n]");
  if (eigenvalues.size() < k || (k < n && eigenvalues.size() < k + 1))
    throw ParameterError("eigenvalues must be listed at least through index K");
  std::optional<double> next;
  if (k < n) next = eigenvalues[k];
  check_standing_assumption(eigenvalues[k - 1], next, eps);

  IndexPartition p;
  p.n = n;
  p.k = k;
  p.epsilon = eps;
  std::size_t a = 0;
  while (a < k && eigenvalues[a] >= 1.0 - eps) ++a;
  for (std::size_t i = a; i < k; ++i)
    if (eigenvalues[i] >= 1.0 - eps)
      throw NumericalError("eigenvalues are not monotone around the partition boundary", i);
  std::size_t b = k;
  while (b < n && b < eigenvalues.size() && eigenvalues[b] > eps) ++b;
  if (b < n && b == eigenvalues.size())
    throw ParameterError("eigenvalues end before dropping to eps; supply more of them");
  p.i1 = {0, a};
  p.i2 = {a, k};
  p.i3 = {k, b};
  p.i4 = {b, n};
  return p;
}

TransitionPlan plan_transition(const DpssSolver& solver, std::size_t k, double eps) {
  check_eps(eps);
  const std::size_t n = solver.n();
  if (k < 1 || k > n) throw ParameterError("taper count must lie in [1, n]");
  auto lam = [&](std::size_t i) { return solver.eigenvalue(i); };
  std::optional<double> next;
  if (k < n) next = lam(k);
  check_standing_assumption(lam(k - 1), next, eps);

  // first index below 1 - eps within [0, k)
  std::size_t lo = 0, hi = k;
  if (lam(k - 1) >= 1.0 - eps) {
    lo = k;
  } else {
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (lam(mid) < 1.0 - eps)
        hi = mid;
      else
        lo = mid + 1;
    }
  }
  const std::size_t a = lo;

  // first index >= k with lambda <= eps: gallop, then bisect
  std::size_t b = k;
  if (k < n && lam(k) > eps) {
    std::size_t good = k, step = 1, bad = n;
    while (good + step < n) {
      if (lam(good + step) > eps) {
        good += step;
        step *= 2;
      } else {
        bad = good + step;
        break;
      }
    }
    lo = good + 1;
    hi = bad;
    while (lo < hi) {
      std::size_t mid = lo + (hi - lo) / 2;
      if (lam(mid) <= eps)
        hi = mid;
      else
        lo = mid + 1;
    }
    b = lo;
  }

  TransitionPlan plan;
  plan.partition.n = n;
  plan.partition.k = k;
  plan.partition.epsilon = eps;
  plan.partition.i1 = {0, a};
  plan.partition.i2 = {a, k};
  plan.partition.i3 = {k, b};
  plan.partition.i4 = {b, n};
  plan.transition = build_taper_bank(solver, a, b - a);
  return plan;
}

SpectralEstimate multitaper_approx(std::span<const cplx> x, const TaperBank& transition,
                                   const IndexPartition& partition, double w, std::size_t k,
                                   std::size_t l) {
  const std::size_t n = x.size();
  if (n == 0) throw ParameterError("signal must be nonempty");
  if (l < n) throw ParameterError("grid size l must be at least n");
  if (partition.n != n || partition.k != k) throw ParameterError("partition does not match (n, k)");
  const IndexRange tr = partition.transition();
  if (transition.n != n || transition.first_index != tr.begin || transition.k_computed() != tr.size())
    throw ParameterError("missing transition taper: bank must hold exactly the i2 and i3 tapers");

  fft::ScopedTally tally;
  SpectralEstimate e;
  e.grid.l = l;
  e.method = Method::MultitaperApprox;
  e.meta.n = n;
  e.meta.w = w;
  e.meta.k = k;
  e.meta.epsilon = partition.epsilon;

  e.values = psi_weighted_sum(x, w, l);
  const double inv_k = 1.0 / static_cast<double>(k);
  for (double& v : e.values) v *= inv_k;

  const auto& kern = simd::kernels();
  Workspace<cplx> buf(l);
  for (std::size_t idx = tr.begin; idx < tr.end; ++idx) {
    const double lam = transition.eigenvalue_at(idx);
    const double scale = partition.i2.contains(idx) ? (1.0 - lam) * inv_k : -lam * inv_k;
    kern.modulate(x.data(), transition.taper_at(idx).data(), buf.data(), n);
    std::fill(buf.data() + n, buf.data() + l, cplx{});
    fft::forward(buf.span());
    kern.accumulate_power(e.values.data(), buf.data(), l, scale);
  }
  // the exact estimator is nonnegative; cancellation can leave roundoff below 0
  for (double& v : e.values) v = std::max(v, 0.0);

  fft::Tally t = tally.elapsed();
  e.meta.fft_count = t.transforms;
  e.meta.fft_length_equivalents = static_cast<double>(t.points) / static_cast<double>(l);
  return e;
}

}  // namespace mtm
