// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/psd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mtm/error.hpp"
#include "mtm/fft.hpp"

namespace mtm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap01(double f) {
  double r = f - std::floor(f);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace

PiecewisePsd::PiecewisePsd(std::vector<double> breakpoints, std::vector<double> levels) {
  if (breakpoints.empty() || breakpoints.size() != levels.size())
    throw ParameterError("piecewise PSD needs one level per breakpoint and at least one piece");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] >= 0.0 && breakpoints[i] < 1.0))
      throw ParameterError("breakpoints must lie in [0, 1)");
    if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
      throw ParameterError("breakpoints must be strictly increasing");
    if (!(levels[i] >= 0.0) || !std::isfinite(levels[i]))
      throw ParameterError("PSD levels must be finite and nonnegative");
  }
  const std::size_t p = levels.size();
  for (std::size_t i = 0; i < p; ++i) {
    // a breakpoint is kept only if the level actually changes across it
    std::size_t prev = (i + p - 1) % p;
    if (p == 1 || levels[i] != levels[prev]) {
      breakpoints_.push_back(breakpoints[i]);
      levels_.push_back(levels[i]);
    }
  }
  if (breakpoints_.empty()) {
    breakpoints_.push_back(0.0);
    levels_.push_back(levels[0]);
  }
}

PiecewisePsd PiecewisePsd::from_pieces(const std::vector<PsdPiece>& pieces, double background) {
  std::vector<PsdPiece> sorted = pieces;
  std::sort(sorted.begin(), sorted.end(),
            [](const PsdPiece& a, const PsdPiece& b) { return a.start < b.start; });
  std::vector<double> bps{0.0};
  std::vector<double> lv{background};
  double cursor = 0.0;
  for (const PsdPiece& pc : sorted) {
    if (!(pc.start >= 0.0 && pc.end <= 1.0 && pc.start < pc.end))
      throw InputError("PSD pieces must satisfy 0 <= start < end <= 1");
    if (pc.start < cursor) throw InputError("PSD pieces overlap");
    if (pc.start == bps.back())
      lv.back() = pc.level;
    else {
      bps.push_back(pc.start);
      lv.push_back(pc.level);
    }
    if (pc.end < 1.0) {
      bps.push_back(pc.end);
      lv.push_back(background);
    }
    cursor = pc.end;
  }
  return PiecewisePsd(std::move(bps), std::move(lv));
}

double PiecewisePsd::value(double f) const {
  double x = wrap01(f);
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin()) return levels_.back();  // wrapped part of the last piece
  return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

cplx PiecewisePsd::autocorrelation(std::int64_t lag) const {
  cplx acc{};
  if (lag == 0) return {total_power(), 0.0};
  const double tl = kTwoPi * static_cast<double>(lag);
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    double a = piece_start(i), b = piece_end(i);
    // (e^{j tl b} - e^{j tl a}) / (j tl) written as a product to avoid cancellation
    double half = 0.5 * tl * (b - a);
    double mid = 0.5 * tl * (a + b);
    double mag = 2.0 * std::sin(half) / tl;
    acc += levels_[i] * mag * cplx(std::cos(mid), std::sin(mid));
  }
  return acc;
}

double PiecewisePsd::total_power() const {
  double s = 0.0;
  for (std::size_t i = 0; i < levels_.size(); ++i) s += levels_[i] * (piece_end(i) - piece_start(i));
  return s;
}

double PiecewisePsd::global_max() const { return *std::max_element(levels_.begin(), levels_.end()); }

IntervalStats PiecewisePsd::interval_stats(double center, double half_width) const {
  if (!(half_width > 0.0 && half_width < 0.5)) throw ParameterError("half width must lie in (0, 1/2)");
  const double lo = center - half_width, hi = center + half_width;
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  double s1 = 0.0, s2 = 0.0;
  bool jump_inside = false;
  const std::size_t p = levels_.size();
  for (int shift = -2; shift <= 2; ++shift) {
    for (std::size_t i = 0; i < p; ++i) {
      double a = piece_start(i) + shift, b = piece_end(i) + shift;
      double ov = std::min(b, hi) - std::max(a, lo);
      if (p > 1 && a >= lo && a <= hi) jump_inside = true;
      if (ov <= 0.0) continue;
      mn = std::min(mn, levels_[i]);
      mx = std::max(mx, levels_[i]);
      s1 += levels_[i] * ov;
      s2 += levels_[i] * levels_[i] * ov;
    }
  }
  IntervalStats st;
  const double len = hi - lo;
  st.min = mn;
  st.max = mx;
  st.mean = std::clamp(s1 / len, mn, mx);
  st.rms = std::clamp(std::sqrt(s2 / len), mn, mx);
  if (!jump_inside) st.curvature = 0.0;
  return st;
}

SmoothPsd::SmoothPsd(std::function<double(double)> fn, std::string description,
                     std::size_t quadrature_points)
    : fn_(std::move(fn)), description_(std::move(description)) {
  if (quadrature_points < 16) throw ParameterError("too few quadrature points");
  const std::size_t q = quadrature_points;
  acf_.resize(q);
  for (std::size_t i = 0; i < q; ++i) {
    double v = fn_(static_cast<double>(i) / static_cast<double>(q));
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("smooth PSD must be finite and nonnegative");
    max_ = std::max(max_, v);
    acf_[i] = v;
  }
  // r(lag) = (1/q) sum_i S(i/q) e^{+j 2 pi i lag / q}
  fft::backward(acf_);
  for (cplx& c : acf_) c /= static_cast<double>(q);
}

double SmoothPsd::value(double f) const { return fn_(wrap01(f)); }

cplx SmoothPsd::autocorrelation(std::int64_t lag) const {
  const auto q = static_cast<std::int64_t>(acf_.size());
  std::int64_t idx = ((lag % q) + q) % q;
  return acf_[static_cast<std::size_t>(idx)];
}

double SmoothPsd::total_power() const { return acf_[0].real(); }

double SmoothPsd::global_max() const { return max_; }

IntervalStats SmoothPsd::interval_stats(double center, double half_width) const {
  if (!(half_width > 0.0 && half_width < 0.5)) throw ParameterError("half width must lie in (0, 1/2)");
  // composite Simpson on a fine grid; curvature from second differences
  const int m = 4096;
  const double h = 2.0 * half_width / m;
  std::vector<double> v(m + 1);
  for (int i = 0; i <= m; ++i) v[i] = value(center - half_width + i * h);
  double s1 = 0.0, s2 = 0.0;
  double mn = v[0], mx = v[0];
  for (int i = 0; i <= m; ++i) {
    double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s1 += wgt * v[i];
    s2 += wgt * v[i] * v[i];
    mn = std::min(mn, v[i]);
    mx = std::max(mx, v[i]);
  }
  s1 *= h / 3.0;
  s2 *= h / 3.0;
  double curv = 0.0;
  for (int i = 1; i < m; ++i) curv = std::max(curv, std::abs(v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h));
  IntervalStats st;
  st.min = mn;
  st.max = mx;
  st.mean = std::clamp(s1 / (2.0 * half_width), mn, mx);
  st.rms = std::clamp(std::sqrt(s2 / (2.0 * half_width)), mn, mx);
  st.curvature = 1.1 * curv;
  return st;
}

SmoothPsd log_bump_psd(const std::vector<LogBump>& bumps, double base) {
  std::string desc = "log-bumps";
  auto fn = [bumps, base](double f) {
    double e = base;
    for (const LogBump& b : bumps) {
      double kappa = 1.0 / ((kTwoPi * b.width) * (kTwoPi * b.width));
      e += b.height * std::exp(kappa * (std::cos(kTwoPi * (f - b.center)) - 1.0));
    }
    return std::pow(10.0, e);
  };
  return SmoothPsd(fn, desc);
}

PiecewisePsd multiband_fixture() {
  return PiecewisePsd({0.18, 0.22, 0.28, 0.32, 0.38, 0.42, 0.78, 0.82},
                      {1e3, 1.0, 1e9, 1.0, 1e2, 1.0, 10.0, 1.0});
}

PiecewisePsd flat_psd(double level) { return PiecewisePsd({0.0}, {level}); }

SmoothPsd comparison_fixture() {
  return log_bump_psd({{0.30, 0.05, 7.0}, {0.70, 0.03, 3.0}});
}

}  // namespace mtm
