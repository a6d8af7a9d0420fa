// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/dpss.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"
#include "mtm/parallel.hpp"
#include "mtm/rng.hpp"
#include "mtm/simd.hpp"

namespace mtm {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kStartSeed = 0x51e9f7a3c2d4b681ull;
constexpr int kMaxInverseIterations = 10;

double sinc_entry(double w, std::size_t lag) {
  if (lag == 0) return 2.0 * w;
  double m = static_cast<double>(lag);
  return std::sin(2.0 * kPi * w * m) / (kPi * m);
}

// Gaussian elimination with partial pivoting for T - mu I, kept in the
// LAPACK dgttrf layout: dl multipliers, d pivots, du and du2 the two upper bands.
struct TridiagLU {
  std::vector<double> dl, d, du, du2;
  std::vector<char> swapped;

  TridiagLU(const DpssSolver::Half& h, double mu) {
    const std::size_t m = h.diag.size();
    d.resize(m);
    for (std::size_t i = 0; i < m; ++i) d[i] = h.diag[i] - mu;
    dl.assign(h.off.begin(), h.off.end());
    du.assign(h.off.begin(), h.off.end());
    du2.assign(m > 2 ? m - 2 : 0, 0.0);
    swapped.assign(m > 0 ? m - 1 : 0, 0);
    // exactly singular pivots are nudged by a relative machine epsilon
    const double tiny = DBL_EPSILON * std::max(h.norm, 1.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < m) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    if (m > 0 && d[m - 1] == 0.0) d[m - 1] = tiny;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t m = d.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (!swapped[i]) {
        b[i + 1] -= dl[i] * b[i];
      } else {
        double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl[i] * b[i];
      }
    }
    if (m == 0) return;
    b[m - 1] /= d[m - 1];
    if (m > 1) b[m - 2] = (b[m - 2] - du[m - 2] * b[m - 1]) / d[m - 2];
    for (std::size_t r = m - 2; r-- > 0;) {
      b[r] = (b[r] - du[r] * b[r + 1] - du2[r] * b[r + 2]) / d[r];
    }
  }
};

void finalize_half(DpssSolver::Half& h) {
  const std::size_t m = h.diag.size();
  h.off_sq.resize(h.off.size());
  double max_sq = 0.0;
  for (std::size_t i = 0; i < h.off.size(); ++i) {
    h.off_sq[i] = h.off[i] * h.off[i];
    max_sq = std::max(max_sq, h.off_sq[i]);
  }
  h.pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_sq);
  h.lower = std::numeric_limits<double>::infinity();
  h.upper = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    double r = (i > 0 ? std::abs(h.off[i - 1]) : 0.0) + (i < h.off.size() ? std::abs(h.off[i]) : 0.0);
    h.lower = std::min(h.lower, h.diag[i] - r);
    h.upper = std::max(h.upper, h.diag[i] + r);
  }
  if (m == 0) h.lower = h.upper = 0.0;
  h.norm = std::max(std::abs(h.lower), std::abs(h.upper));
  double pad = 2.0 * DBL_EPSILON * h.norm + 2.0 * h.pivmin;
  h.lower -= pad;
  h.upper += pad;
}

}  // namespace

void validate_bandwidth(double w) {
  if (!(w > 0.0 && w < 0.5)) throw ParameterError("half-bandwidth w must lie in (0, 1/2), got " + std::to_string(w));
}

double clamp_eigenvalue(double lambda) {
  constexpr double below_one = 1.0 - DBL_EPSILON / 2.0;
  if (!(lambda >= DBL_EPSILON)) return DBL_EPSILON;
  return std::min(lambda, below_one);
}

ProlateKernel::ProlateKernel(std::size_t n, double w) : n_(n), w_(w) {
  if (n == 0) throw ParameterError("prolate kernel needs n >= 1");
  validate_bandwidth(w);
  column_.resize(n);
  for (std::size_t m = 0; m < n; ++m) column_[m] = sinc_entry(w, m);

  const std::size_t len = 2 * n;
  std::vector<double> c(len, 0.0);
  for (std::size_t m = 0; m < n; ++m) c[m] = column_[m];
  for (std::size_t m = 1; m < n; ++m) c[len - m] = column_[m];
  std::vector<cplx> spec(len / 2 + 1);
  fft::forward_real(c, spec);
  embed_spectrum_.resize(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) embed_spectrum_[i] = spec[i].real();
}

double ProlateKernel::entry(std::size_t row, std::size_t col) const {
  return column_[row > col ? row - col : col - row];
}

std::vector<double> ProlateKernel::apply(std::span<const double> v) const {
  if (v.size() != n_) throw ParameterError("apply_prolate: vector length does not match n");
  const std::size_t len = 2 * n_;
  std::vector<double> buf(len, 0.0);
  std::copy(v.begin(), v.end(), buf.begin());
  std::vector<cplx> spec(len / 2 + 1);
  fft::forward_real(buf, spec);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= embed_spectrum_[i];
  fft::backward_real(spec, buf);
  const double scale = 1.0 / static_cast<double>(len);
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = buf[i] * scale;
  return out;
}

std::vector<cplx> ProlateKernel::apply(std::span<const cplx> v) const {
  if (v.size() != n_) throw ParameterError("apply_prolate: vector length does not match n");
  const std::size_t len = 2 * n_;
  std::vector<cplx> buf(len, cplx{});
  std::copy(v.begin(), v.end(), buf.begin());
  fft::forward(buf);
  for (std::size_t i = 0; i < len; ++i) buf[i] *= embed_spectrum_[i <= n_ ? i : len - i];
  fft::backward(buf);
  const double scale = 1.0 / static_cast<double>(len);
  std::vector<cplx> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = buf[i] * scale;
  return out;
}

double ProlateKernel::quadratic_form(std::span<const double> v) const {
  std::vector<double> bv = apply(v);
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += v[i] * bv[i];
  return s;
}

std::vector<double> apply_prolate(const ProlateKernel& kernel, std::span<const double> v) {
  return kernel.apply(v);
}

std::vector<cplx> apply_prolate(const ProlateKernel& kernel, std::span<const cplx> v) {
  return kernel.apply(v);
}

DpssSolver::DpssSolver(std::size_t n, double w) : n_(n), w_(w), kernel_(n, w) {
  const double cw = std::cos(2.0 * kPi * w);
  auto diag = [&](std::size_t i) {
    double t = (static_cast<double>(n) - 1.0 - 2.0 * static_cast<double>(i)) / 2.0;
    return t * t * cw;
  };
  auto off = [&](std::size_t i) {
    return static_cast<double>(i + 1) * static_cast<double>(n - 1 - i) / 2.0;
  };

  const std::size_t m = n / 2;
  if (n % 2 == 0) {
    for (Half* h : {&even_, &odd_}) {
      h->diag.resize(m);
      for (std::size_t i = 0; i < m; ++i) h->diag[i] = diag(i);
      h->off.resize(m > 0 ? m - 1 : 0);
      for (std::size_t i = 0; i + 1 < m; ++i) h->off[i] = off(i);
    }
    even_.diag[m - 1] += off(m - 1);
    odd_.diag[m - 1] -= off(m - 1);
  } else {
    // symmetric half keeps the centre sample, scaled so the block stays symmetric
    even_.diag.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) even_.diag[i] = diag(i);
    even_.off.resize(m);
    for (std::size_t i = 0; i < m; ++i) even_.off[i] = off(i);
    if (m > 0) even_.off[m - 1] *= std::numbers::sqrt2;
    odd_.diag.resize(m);
    for (std::size_t i = 0; i < m; ++i) odd_.diag[i] = diag(i);
    odd_.off.resize(m > 0 ? m - 1 : 0);
    for (std::size_t i = 0; i + 1 < m; ++i) odd_.off[i] = off(i);
  }
  finalize_half(even_);
  finalize_half(odd_);
}

std::vector<double> DpssSolver::bisect(const Half& h, std::span<const std::size_t> ranks) const {
  const std::size_t m = h.diag.size();
  const std::size_t count = ranks.size();
  std::vector<double> lo(count, h.lower), hi(count, h.upper);
  std::vector<std::size_t> active(count);
  std::iota(active.begin(), active.end(), 0);
  std::vector<double> shifts;
  std::vector<std::uint32_t> counts;
  const auto& kern = simd::kernels();

  for (int iter = 0; iter < 256 && !active.empty(); ++iter) {
    shifts.resize(active.size());
    counts.resize(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      std::size_t i = active[a];
      shifts[a] = lo[i] + 0.5 * (hi[i] - lo[i]);
    }
    kern.sturm_counts(h.diag.data(), h.off_sq.data(), m, h.pivmin, shifts.data(), shifts.size(),
                      counts.data());
    std::vector<std::size_t> still;
    still.reserve(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
      std::size_t i = active[a];
      double mid = shifts[a];
      if (counts[a] <= ranks[i])
        lo[i] = mid;
      else
        hi[i] = mid;
      double tol = 2.0 * DBL_EPSILON * std::max(std::abs(lo[i]), std::abs(hi[i])) + h.pivmin;
      double next = lo[i] + 0.5 * (hi[i] - lo[i]);
      if (hi[i] - lo[i] > tol && next != lo[i] && next != hi[i]) still.push_back(i);
    }
    active.swap(still);
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo[i] + 0.5 * (hi[i] - lo[i]);
  return out;
}

std::vector<double> DpssSolver::inverse_iteration(const Half& h, double mu, std::size_t k) const {
  const std::size_t m = h.diag.size();
  std::vector<double> v(m);
  if (m == 1) {
    v[0] = 1.0;
    return v;
  }
  CounterStream stream(kStartSeed, k);
  for (std::size_t i = 0; i < m; ++i) v[i] = 2.0 * stream.uniforms(i)[0] - 1.0;

  TridiagLU lu(h, mu);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double e : x) s += e * e;
    s = 1.0 / std::sqrt(s);
    for (double& e : x) e *= s;
  };
  normalize(v);
  std::vector<double> prev;
  double last_diff = 1.0;
  for (int it = 0; it < kMaxInverseIterations; ++it) {
    prev = v;
    lu.solve(v);
    double mx = 0.0;
    for (double e : v) mx = std::max(mx, std::abs(e));
    if (!std::isfinite(mx) || mx == 0.0) break;
    for (double& e : v) e /= mx;
    normalize(v);
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += v[i] * prev[i];
    if (dot < 0) for (double& e : v) e = -e;
    double diff = 0.0;
    for (std::size_t i = 0; i < m; ++i) diff = std::max(diff, std::abs(v[i] - prev[i]));
    if (it >= 1 && diff <= 1e-13) return v;
    // long halves settle at a rounding floor above 1e-13; stop once the
    // change is tiny and no longer shrinking
    if (it >= 2 && diff <= 1e-10 && diff > 0.5 * last_diff) return v;
    last_diff = diff;
  }
  throw NumericalError("inverse iteration did not converge for taper " + std::to_string(k), k);
}

std::vector<double> DpssSolver::expand(std::span<const double> u, bool even) const {
  const std::size_t n = n_;
  std::vector<double> v(n, 0.0);
  const std::size_t m = n / 2;
  const double sign = even ? 1.0 : -1.0;
  for (std::size_t i = 0; i < m; ++i) {
    v[i] = u[i];
    v[n - 1 - i] = sign * u[i];
  }
  if (n % 2 == 1 && even) v[m] = std::numbers::sqrt2 * u[m];
  return v;
}

Slepian DpssSolver::finish(std::vector<double> v) const {
  double ss = 0.0, sum = 0.0, mx = 0.0;
  for (double e : v) {
    ss += e * e;
    sum += e;
    mx = std::max(mx, std::abs(e));
  }
  const double inv = 1.0 / std::sqrt(ss);
  sum *= inv;
  mx *= inv;
  for (double& e : v) e *= inv;

  double sign_ref = 0.0;
  if (std::abs(sum) > 1e-10 * std::sqrt(static_cast<double>(n_))) {
    sign_ref = sum;
  } else {
    for (double e : v) {
      if (std::abs(e) >= 1e-10 * mx) {
        sign_ref = e;
        break;
      }
    }
  }
  if (sign_ref < 0) for (double& e : v) e = -e;

  Slepian s;
  s.eigenvalue = clamp_eigenvalue(kernel_.quadratic_form(v));
  s.taper = std::move(v);
  return s;
}

Slepian DpssSolver::compute(std::size_t k) const {
  return std::move(compute_range(k, 1).front());
}

std::vector<Slepian> DpssSolver::compute_range(std::size_t first, std::size_t count) const {
  if (first + count > n_) throw ParameterError("taper index exceeds n");
  std::vector<Slepian> out(count);
  if (count == 0) return out;

  std::vector<double> mu(count);
  for (int parity = 0; parity < 2; ++parity) {
    const Half& h = parity == 0 ? even_ : odd_;
    std::vector<std::size_t> slots, ranks;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t k = first + i;
      if (k % 2 != static_cast<std::size_t>(parity)) continue;
      slots.push_back(i);
      ranks.push_back(h.diag.size() - 1 - k / 2);
    }
    if (slots.empty()) continue;
    std::vector<double> vals = bisect(h, ranks);
    for (std::size_t j = 0; j < slots.size(); ++j) mu[slots[j]] = vals[j];
  }

  parallel_for(count, [&](std::size_t i) {
    std::size_t k = first + i;
    bool even = k % 2 == 0;
    std::vector<double> u = inverse_iteration(even ? even_ : odd_, mu[i], k);
    out[i] = finish(expand(u, even));
  });

  std::lock_guard<std::mutex> lock(memo_mu_);
  for (std::size_t i = 0; i < count; ++i) memo_[first + i] = out[i].eigenvalue;
  return out;
}

double DpssSolver::eigenvalue(std::size_t k) const {
  {
    std::lock_guard<std::mutex> lock(memo_mu_);
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
  }
  return compute(k).eigenvalue;
}

TaperBank build_taper_bank(const DpssSolver& solver, std::size_t first, std::size_t count) {
  if (first + count > solver.n()) throw ParameterError("requested tapers exceed n");
  TaperBank bank;
  bank.n = solver.n();
  bank.w = solver.w();
  bank.first_index = first;
  bank.narrow_band = 2.0 * static_cast<double>(bank.n) * bank.w <= 1.0;
  bank.eigenvalues.resize(count);
  bank.data.resize(count * bank.n);
  // chunks keep peak memory near the bank itself for large counts
  const std::size_t chunk = 256;
  for (std::size_t start = 0; start < count; start += chunk) {
    std::size_t c = std::min(chunk, count - start);
    std::vector<Slepian> part = solver.compute_range(first + start, c);
    for (std::size_t i = 0; i < c; ++i) {
      bank.eigenvalues[start + i] = part[i].eigenvalue;
      std::copy(part[i].taper.begin(), part[i].taper.end(),
                bank.data.begin() + static_cast<std::ptrdiff_t>((start + i) * bank.n));
    }
  }
  return bank;
}

TaperBank build_taper_bank(std::size_t n, double w, std::size_t k_max) {
  if (n == 0) throw ParameterError("n must be positive");
  validate_bandwidth(w);
  if (k_max < 1 || k_max > n) throw ParameterError("k_max must lie in [1, n]");
  DpssSolver solver(n, w);
  return build_taper_bank(solver, 0, k_max);
}

}  // namespace mtm
