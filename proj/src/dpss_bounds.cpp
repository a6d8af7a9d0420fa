// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <cfloat>
#include <cmath>
#include <numbers>
#include <string>

#include "mtm/dpss.hpp"
#include "mtm/error.hpp"

namespace mtm {
namespace {

double log_scale(std::size_t n, double w) {
  const double nw = static_cast<double>(n) * w;
  return 2.0 / (std::numbers::pi * std::numbers::pi) * std::log(100.0 * nw + 25.0);
}

}  // namespace

std::size_t floor_2nw(std::size_t n, double w) {
  double x = 2.0 * static_cast<double>(n) * w;
  return static_cast<std::size_t>(std::floor(x + 64.0 * DBL_EPSILON * x));
}

double transition_width_bound(std::size_t n, double w, double eps) {
  validate_bandwidth(w);
  if (!(eps > 0.0 && eps < 0.5)) throw ParameterError("eps must lie in (0, 1/2)");
  return log_scale(n, w) * std::log(5.0 / (eps * (1.0 - eps))) + 7.0;
}

double eigenvalue_lower_bound(std::size_t n, double w, std::size_t k) {
  validate_bandwidth(w);
  const std::size_t f = floor_2nw(n, w);
  if (f == 0 || k > f - 1)
    throw ParameterError("eigenvalue_lower_bound: k must satisfy 0 <= k <= floor(2nw) - 1");
  double num = static_cast<double>(f) - static_cast<double>(k) - 7.0;
  return 1.0 - 10.0 * std::exp(-num / log_scale(n, w));
}

std::size_t select_num_tapers(const DpssSolver& solver, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  const std::size_t n = solver.n();
  const double level = 1.0 - delta;
  auto good = [&](std::size_t count) { return solver.eigenvalue(count - 1) >= level; };
  if (!good(1)) return 0;

  // good() is monotone in the count; bracket then bisect
  std::size_t lo = 1, hi = n + 1;
  std::size_t probe = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(
                                                   2.0 * static_cast<double>(n) * solver.w())));
  while (probe <= n) {
    if (good(probe)) {
      lo = probe;
      if (probe == n) break;
      probe = std::min(n, probe * 2);
    } else {
      hi = probe;
      break;
    }
  }
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (good(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::size_t select_num_tapers(std::size_t n, double w, double delta) {
  if (n == 0) throw ParameterError("n must be positive");
  validate_bandwidth(w);
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  DpssSolver solver(n, w);
  return select_num_tapers(solver, delta);
}

}  // namespace mtm
