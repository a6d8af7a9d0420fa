// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"
#include "mtm/simd.hpp"
#include "mtm/workspace.hpp"

namespace mtm {
namespace {

void check_grid(std::size_t n, std::size_t l) {
  if (n == 0) throw ParameterError("signal must be nonempty");
  if (l < n) throw ParameterError("grid size l must be at least n");
}

void check_bank(std::span<const cplx> x, const TaperBank& bank, std::size_t k) {
  if (x.size() != bank.n) throw ParameterError("signal length does not match the taper bank");
  if (bank.first_index != 0) throw ParameterError("bank must start at taper 0");
  if (k < 1 || k > bank.k_computed()) throw ParameterError("k exceeds the computed tapers");
}

// acc += scale * |DFT_l(taper .* x)|^2, using buf (length l) as scratch.
void add_tapered_power(std::span<const cplx> x, std::span<const double> taper, double scale,
                       std::span<cplx> buf, double* acc) {
  const auto& kern = simd::kernels();
  kern.modulate(x.data(), taper.data(), buf.data(), x.size());
  std::fill(buf.begin() + static_cast<std::ptrdiff_t>(x.size()), buf.end(), cplx{});
  fft::forward(buf);
  kern.accumulate_power(acc, buf.data(), buf.size(), scale);
}

SpectralEstimate make_estimate(std::size_t l, Method m, std::size_t n, double w, std::size_t k) {
  SpectralEstimate e;
  e.grid.l = l;
  e.method = m;
  e.meta.n = n;
  e.meta.w = w;
  e.meta.k = k;
  return e;
}

void stamp(SpectralEstimate& e, const fft::ScopedTally& tally) {
  fft::Tally t = tally.elapsed();
  e.meta.fft_count = t.transforms;
  e.meta.fft_length_equivalents = static_cast<double>(t.points) / static_cast<double>(e.grid.l);
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Periodogram:
      return "periodogram";
    case Method::Single:
      return "single";
    case Method::Multitaper:
      return "multitaper";
    case Method::MultitaperApprox:
      return "multitaper-approx";
    case Method::Adaptive:
      return "adaptive";
  }
  return "unknown";
}

SpectralEstimate periodogram(std::span<const cplx> x, std::size_t l) {
  check_grid(x.size(), l);
  fft::ScopedTally tally;
  SpectralEstimate e = make_estimate(l, Method::Periodogram, x.size(), 0.0, 1);
  Workspace<cplx> buf(l);
  std::copy(x.begin(), x.end(), buf.data());
  fft::forward(buf.span());
  e.values.assign(l, 0.0);
  simd::kernels().accumulate_power(e.values.data(), buf.data(), l, 1.0 / static_cast<double>(x.size()));
  stamp(e, tally);
  return e;
}

SpectralEstimate tapered_periodogram(std::span<const cplx> x, std::span<const double> taper,
                                     std::size_t l) {
  check_grid(x.size(), l);
  if (taper.size() != x.size()) throw ParameterError("taper length does not match the signal");
  double ss = 0.0;
  for (double t : taper) ss += t * t;
  if (std::abs(std::sqrt(ss) - 1.0) > 1e-6) throw ParameterError("taper must have unit norm");
  fft::ScopedTally tally;
  SpectralEstimate e = make_estimate(l, Method::Single, x.size(), 0.0, 1);
  Workspace<cplx> buf(l);
  e.values.assign(l, 0.0);
  add_tapered_power(x, taper, 1.0, buf.span(), e.values.data());
  stamp(e, tally);
  return e;
}

SpectralEstimate multitaper_exact(std::span<const cplx> x, const TaperBank& bank, std::size_t k,
                                  std::size_t l) {
  check_bank(x, bank, k);
  check_grid(x.size(), l);
  fft::ScopedTally tally;
  SpectralEstimate e = make_estimate(l, Method::Multitaper, x.size(), bank.w, k);
  Workspace<cplx> buf(l);
  e.values.assign(l, 0.0);
  const double scale = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) add_tapered_power(x, bank.taper(i), scale, buf.span(), e.values.data());
  stamp(e, tally);
  return e;
}

std::vector<double> spectral_window(const TaperBank& bank, std::size_t k, std::size_t l) {
  if (bank.first_index != 0) throw ParameterError("bank must start at taper 0");
  if (k < 1 || k > bank.k_computed()) throw ParameterError("k exceeds the computed tapers");
  check_grid(bank.n, l);
  std::vector<cplx> ones(bank.n, cplx(1.0, 0.0));
  std::vector<double> psi(l, 0.0);
  Workspace<cplx> buf(l);
  const double scale = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) add_tapered_power(ones, bank.taper(i), scale, buf.span(), psi.data());
  return psi;
}

std::vector<double> single_taper_spectra(std::span<const cplx> x, const TaperBank& bank,
                                         std::size_t k, std::size_t l) {
  check_bank(x, bank, k);
  check_grid(x.size(), l);
  std::vector<double> rows(k * l, 0.0);
  Workspace<cplx> buf(l);
  for (std::size_t i = 0; i < k; ++i) add_tapered_power(x, bank.taper(i), 1.0, buf.span(), rows.data() + i * l);
  return rows;
}

AdaptiveResult adaptive_multitaper(std::span<const cplx> x, const TaperBank& bank, std::size_t k,
                                   std::size_t l, AdaptiveOptions opts) {
  return adaptive_multitaper(x, bank, bank.eigenvalues, k, l, opts);
}

AdaptiveResult adaptive_multitaper(std::span<const cplx> x, const TaperBank& bank,
                                   std::span<const double> eigenvalues, std::size_t k,
                                   std::size_t l, AdaptiveOptions opts) {
  check_bank(x, bank, k);
  check_grid(x.size(), l);
  if (eigenvalues.size() < k) throw ParameterError("need an eigenvalue per taper");
  if (!(opts.tol > 0.0)) throw ParameterError("adaptive tolerance must be positive");

  fft::ScopedTally tally;
  AdaptiveResult res;
  res.estimate = make_estimate(l, Method::Adaptive, x.size(), bank.w, k);
  res.estimate.values.assign(l, 0.0);
  res.weights.assign(k * l, 0.0);

  double energy = 0.0;
  for (const cplx& v : x) energy += std::norm(v);
  const double sigma2 = energy / static_cast<double>(x.size());
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    res.converged = true;
    return res;
  }

  std::vector<double> rows = single_taper_spectra(x, bank, k, l);
  std::vector<double> lam(eigenvalues.begin(), eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<double> oml(k);
  for (std::size_t i = 0; i < k; ++i) oml[i] = 1.0 - lam[i];

  std::vector<double> cur(l, 0.0), next(l);
  const std::size_t init = std::min<std::size_t>(2, k);
  for (std::size_t i = 0; i < init; ++i)
    for (std::size_t j = 0; j < l; ++j) cur[j] += rows[i * l + j] / static_cast<double>(init);

  const auto& kern = simd::kernels();
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    kern.adaptive_sweep(rows.data(), k, l, lam.data(), oml.data(), sigma2, cur.data(), next.data(), l);
    double change = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      double scale = std::max(std::abs(next[j]), std::abs(cur[j]));
      if (scale > 0.0) change = std::max(change, std::abs(next[j] - cur[j]) / scale);
    }
    cur.swap(next);
    res.iterations = it + 1;
    if (change < opts.tol) {
      res.converged = true;
      break;
    }
  }

  // report weights at the final iterate and the estimate they produce
  for (std::size_t j = 0; j < l; ++j) {
    const double s = cur[j];
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double ls = lam[i] * s;
      double t = ls + oml[i] * sigma2;
      double tt = t * t;
      double a = tt > 0.0 ? (ls * s) / tt : 0.0;
      res.weights[i * l + j] = a;
      num += a * rows[i * l + j];
      den += a;
    }
    res.estimate.values[j] = den > 0.0 ? num / den : 0.0;
  }
  stamp(res.estimate, tally);
  return res;
}

double multitaper_at(std::span<const cplx> x, const TaperBank& bank, std::size_t k, double f) {
  check_bank(x, bank, k);
  const std::size_t n = x.size();
  std::vector<cplx> mod(n);
  for (std::size_t i = 0; i < n; ++i) {
    // reduce the phase argument exactly before scaling by 2 pi
    double ph = f * static_cast<double>(i);
    ph -= std::floor(ph);
    mod[i] = x[i] * std::polar(1.0, -2.0 * std::numbers::pi * ph);
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    auto s = bank.taper(t);
    cplx sum{};
    for (std::size_t i = 0; i < n; ++i) sum += s[i] * mod[i];
    acc += std::norm(sum);
  }
  return acc / static_cast<double>(k);
}

std::vector<double> mean_log_deviation(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw ParameterError("estimate and truth lengths differ");
  std::vector<double> out(estimate.size());
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    double e = estimate[i], s = truth[i];
    if (s > 0.0)
      out[i] = e > 0.0 ? std::abs(10.0 * std::log10(e / s)) : std::numeric_limits<double>::infinity();
    else
      out[i] = e > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

std::vector<double> mean_log_deviation(const SpectralEstimate& estimate, const PsdModel& truth) {
  std::vector<double> s(estimate.grid.l);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = truth.value(estimate.grid.frequency(i));
  return mean_log_deviation(estimate.values, s);
}

}  // namespace mtm
