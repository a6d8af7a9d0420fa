// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"

namespace mtm {

SigmaStats sigma_stats(std::span<const double> eigenvalues, std::size_t k) {
  if (k < 1 || k > eigenvalues.size()) throw ParameterError("sigma_stats: k must lie in [1, #eigenvalues]");
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double d = 1.0 - eigenvalues[i];
    s1 += d;
    s2 += d * d;
  }
  SigmaStats s;
  s.k = k;
  s.sigma1 = s1 / static_cast<double>(k);
  s.sigma2 = std::sqrt(s2 / static_cast<double>(k));
  s.lambda_last = eigenvalues[k - 1];
  return s;
}

LocalPsdStats local_psd_stats(const PsdModel& psd, double f, double w) {
  validate_bandwidth(w);
  IntervalStats st = psd.interval_stats(f, w);
  LocalPsdStats out;
  out.f = f;
  out.w = w;
  out.m_f = st.min;
  out.big_m_f = st.max;
  out.a_f = st.mean;
  out.r_f = st.rms;
  out.big_m = std::max(psd.global_max(), st.max);
  out.m2_f = st.curvature;
  return out;
}

double bias_bound_smooth(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                         std::size_t k) {
  if (!stats.m2_f)
    throw InapplicableError("smooth bias bound needs S twice differentiable on [f - W, f + W]");
  const double nd = static_cast<double>(n);
  return *stats.m2_f * nd * w * w * w / (3.0 * static_cast<double>(k)) +
         (stats.big_m + stats.big_m_f) * sig.sigma1;
}

double bias_bound_general(const LocalPsdStats& stats, const SigmaStats& sig) {
  return (stats.big_m_f - stats.m_f) * (1.0 - sig.sigma1) + stats.big_m * sig.sigma1;
}

double variance_bound(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                      std::size_t k) {
  const double kd = static_cast<double>(k);
  double t = stats.r_f * std::sqrt(2.0 * static_cast<double>(n) * w / kd) + stats.big_m * sig.sigma2;
  return t * t / kd;
}

double circular_distance(double f1, double f2) {
  double d = std::abs(f1 - f2);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

double covariance_bound(const LocalPsdStats& stats1, const LocalPsdStats& stats2,
                        const SigmaStats& sig, std::size_t n, double w, std::size_t k) {
  double d = circular_distance(stats1.f, stats2.f);
  if (!(d > 2.0 * w && d < 1.0 - 2.0 * w))
    throw InapplicableError("covariance bound needs the frequencies more than 2W apart");
  double big_m = std::max(stats1.big_m, stats2.big_m);
  double t = (stats1.r_f + stats2.r_f) *
                 std::sqrt(2.0 * static_cast<double>(n) * w / static_cast<double>(k) * sig.sigma1) +
             big_m * sig.sigma1;
  return t * t;
}

double kappa_lower_bound(const LocalPsdStats& stats, const SigmaStats& sig, std::size_t n, double w,
                         std::size_t k) {
  double den = stats.big_m_f + (stats.big_m - stats.big_m_f) * (1.0 - sig.lambda_last);
  if (!(den > 0.0)) throw InapplicableError("kappa bound denominator vanishes");
  double num = static_cast<double>(k) * (1.0 - sig.sigma1) * stats.big_m_f -
               2.0 * static_cast<double>(n) * w * (stats.big_m_f - stats.a_f);
  return num / den;
}

TailBounds tail_probability(double kappa, double beta) {
  if (!(beta > 0.0)) throw ParameterError("beta must be positive");
  if (beta == 1.0) throw ParameterError("beta must differ from 1");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
  double expo = std::exp(-kappa * (beta - 1.0 - std::log(beta)));
  TailBounds t;
  if (beta > 1.0)
    t.upper = expo / beta;
  else
    t.lower = expo;
  return t;
}

BoundReport make_bound_report(const PsdModel& psd, std::span<const double> eigenvalues,
                              std::size_t n, double w, std::size_t k, double f,
                              std::optional<double> f2) {
  BoundReport r;
  r.n = n;
  r.w = w;
  r.k = k;
  r.f = f;
  r.sigma = sigma_stats(eigenvalues, k);
  r.stats = local_psd_stats(psd, f, w);
  if (r.stats.m2_f) r.bias_smooth = bias_bound_smooth(r.stats, r.sigma, n, w, k);
  r.bias_general = bias_bound_general(r.stats, r.sigma);
  r.variance = variance_bound(r.stats, r.sigma, n, w, k);
  r.kappa_lower = kappa_lower_bound(r.stats, r.sigma, n, w, k);
  r.kappa_vacuous = !(r.kappa_lower > 0.0);
  if (f2) {
    r.f2 = f2;
    LocalPsdStats other = local_psd_stats(psd, *f2, w);
    r.covariance = covariance_bound(r.stats, other, r.sigma, n, w, k);
  }
  return r;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_text(const BoundReport& r) {
  std::ostringstream os;
  os << "n " << r.n << '\n'
     << "w " << num(r.w) << '\n'
     << "k " << r.k << '\n'
     << "f " << num(r.f) << '\n'
     << "sigma1 " << num(r.sigma.sigma1) << '\n'
     << "sigma2 " << num(r.sigma.sigma2) << '\n'
     << "lambda_last " << num(r.sigma.lambda_last) << '\n'
     << "m_f " << num(r.stats.m_f) << '\n'
     << "M_f " << num(r.stats.big_m_f) << '\n'
     << "A_f " << num(r.stats.a_f) << '\n'
     << "R_f " << num(r.stats.r_f) << '\n'
     << "M " << num(r.stats.big_m) << '\n'
     << "bias_smooth " << (r.bias_smooth ? num(*r.bias_smooth) : "inapplicable") << '\n'
     << "bias_general " << num(r.bias_general) << '\n'
     << "variance " << num(r.variance) << '\n'
     << "kappa_lower " << num(r.kappa_lower) << '\n'
     << "kappa_vacuous " << (r.kappa_vacuous ? "true" : "false") << '\n';
  if (r.f2) {
    os << "f2 " << num(*r.f2) << '\n'
       << "covariance " << (r.covariance ? num(*r.covariance) : "inapplicable") << '\n';
  }
  return os.str();
}

std::string to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["w"] = r.w;
  j["k"] = r.k;
  j["f"] = r.f;
  j["sigma"] = {{"sigma1", r.sigma.sigma1}, {"sigma2", r.sigma.sigma2}, {"lambda_last", r.sigma.lambda_last}};
  j["local"] = {{"m_f", r.stats.m_f}, {"M_f", r.stats.big_m_f}, {"A_f", r.stats.a_f},
                {"R_f", r.stats.r_f}, {"M", r.stats.big_m}};
  j["local"]["M2_f"] = r.stats.m2_f ? nlohmann::ordered_json(*r.stats.m2_f) : nlohmann::ordered_json(nullptr);
  j["bias_smooth"] = r.bias_smooth ? nlohmann::ordered_json(*r.bias_smooth) : nlohmann::ordered_json(nullptr);
  j["bias_general"] = r.bias_general;
  j["variance"] = r.variance;
  j["kappa_lower"] = r.kappa_lower;
  j["kappa_vacuous"] = r.kappa_vacuous;
  if (r.f2) {
    j["f2"] = *r.f2;
    j["covariance"] = r.covariance ? nlohmann::ordered_json(*r.covariance) : nlohmann::ordered_json(nullptr);
  }
  return j.dump(2);
}

double expected_multitaper(std::span<const std::complex<double>> r, const TaperBank& bank,
                           std::size_t k, double f) {
  const std::size_t n = bank.n;
  if (r.size() < n) throw ParameterError("need n autocorrelation lags");
  if (k < 1 || k > bank.k_computed()) throw ParameterError("k exceeds the computed tapers");
  using cplx = std::complex<double>;
  const std::size_t len = 2 * n;
  std::vector<cplx> c(len, cplx{});
  for (std::size_t d = 0; d < n; ++d) {
    double ph = f * static_cast<double>(d);
    ph -= std::floor(ph);
    c[d] = r[d] * std::polar(1.0, -2.0 * std::numbers::pi * ph);
  }
  for (std::size_t d = 1; d < n; ++d) c[len - d] = std::conj(c[d]);
  fft::forward(c);

  std::vector<cplx> buf(len);
  double total = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    auto s = bank.taper(t);
    std::fill(buf.begin(), buf.end(), cplx{});
    std::copy(s.begin(), s.end(), buf.begin());
    fft::forward(buf);
    for (std::size_t q = 0; q < len; ++q) buf[q] *= c[q];
    fft::backward(buf);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) acc += s[m] * buf[m].real();
    total += acc / static_cast<double>(len);
  }
  return total / static_cast<double>(k);
}

}  // namespace mtm
