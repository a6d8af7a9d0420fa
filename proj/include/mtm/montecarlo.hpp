// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtm/bounds.hpp"
#include "mtm/dpss.hpp"
#include "mtm/estimators.hpp"
#include "mtm/fast_multitaper.hpp"
#include "mtm/psd.hpp"

namespace mtm {

// One estimator configuration, written on the command line as
//   periodogram | single[:taper=i] | mt:k=29 | mt:delta=1e-9 | mt-fast:k=..,eps=..
//   | adaptive:k=..   with an optional w=... override on any of them.
struct MethodSpec {
  std::string label;
  Method method = Method::Multitaper;
  std::optional<std::size_t> k;
  std::optional<double> delta;
  std::optional<double> w;
  double epsilon = 1e-9;
  std::size_t taper = 0;
  AdaptiveOptions adaptive;
};

MethodSpec parse_method_spec(const std::string& text);

// Precomputes tapers and partitions for a set of methods on one (n, l), then
// evaluates any of them on a signal. Immutable after construction.
class EstimatorSuite {
 public:
  EstimatorSuite(std::size_t n, double w, std::size_t l, std::vector<MethodSpec> methods);

  std::size_t n() const { return n_; }
  std::size_t l() const { return l_; }
  std::size_t size() const { return methods_.size(); }
  const MethodSpec& method(std::size_t i) const { return methods_[i]; }
  std::size_t taper_count(std::size_t i) const { return ks_[i]; }
  double bandwidth(std::size_t i) const { return ws_[i]; }
  // Eigenvalues of the first taper_count(i) tapers (empty for the periodogram).
  std::vector<double> eigenvalues(std::size_t i) const;
  const IndexPartition* partition(std::size_t i) const;
  const TaperBank* bank_for(std::size_t i) const;

  std::vector<double> run(std::size_t i, std::span<const cplx> x) const;

 private:
  struct Shared {
    std::unique_ptr<DpssSolver> solver;
    TaperBank bank;
  };

  std::size_t n_, l_;
  std::vector<MethodSpec> methods_;
  std::vector<std::size_t> ks_;
  std::vector<double> ws_;
  std::map<double, Shared> by_w_;
  std::map<std::size_t, TransitionPlan> plans_;
};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_error() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct SimulationConfig {
  std::size_t n = 0;
  std::size_t l = 0;
  double w = 0.01;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::vector<MethodSpec> methods;
  std::vector<double> probes;                     // frequencies for bound comparisons
  std::vector<std::pair<double, double>> bands;   // MLD averages over [a, b]
  std::size_t workers = 0;
};

struct ProbeSummary {
  double f = 0.0;
  std::size_t bin = 0;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double bias_se = 0.0;
  double variance = 0.0;
  double variance_rel_se = 0.0;
  std::optional<BoundReport> bounds;
  std::optional<bool> bias_within;      // |bias| <= general bound + 3 SE
  std::optional<bool> variance_within;  // var <= bound (1 + 3 relSE)
};

struct MethodSummary {
  std::string label;
  std::size_t k = 0;
  double w = 0.0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> mld;
  double average_mld = 0.0;
  std::vector<double> band_mld;
  std::vector<ProbeSummary> probes;
};

struct SimulationReport {
  SimulationConfig config;
  std::string sampler_route;
  bool mc_reliable = false;
  std::vector<double> truth;
  std::vector<MethodSummary> methods;
};

// Per-trial results are produced in parallel and folded in trial order, so
// the report is identical for any worker count.
SimulationReport simulate(const PsdModel& psd, const SimulationConfig& config);

std::string to_json(const SimulationReport& report);
std::string plot_csv(const SimulationReport& report);

struct BenchOptions {
  std::vector<double> epsilons{1e-4, 1e-8, 1e-12};
  double delta = 1e-3;
  std::size_t exact_max_n = std::size_t{1} << 16;
  double l_factor = 1.0;
  double min_time = 0.05;  // seconds of repeated compute per timing
  std::uint64_t seed = 7;
};

struct BenchApprox {
  double epsilon = 0.0;
  IndexPartition partition;
  double width_bound = 0.0;
  std::uint64_t fft_count = 0;
  double fft_length_equivalents = 0.0;
  double precompute_seconds = 0.0;
  double compute_seconds = 0.0;
};

struct BenchRow {
  std::size_t n = 0;
  std::size_t l = 0;
  double w = 0.0;
  std::size_t k = 0;
  std::optional<std::uint64_t> exact_fft_count;
  std::optional<double> exact_precompute_seconds;
  std::optional<double> exact_compute_seconds;
  std::vector<BenchApprox> approx;
};

BenchRow bench_point(std::size_t n, const BenchOptions& opts);

// Least-squares slope of log t against log n.
double fit_exponent(std::span<const double> n, std::span<const double> t);

}  // namespace mtm
