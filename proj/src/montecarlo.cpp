// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mtm/error.hpp"
#include "mtm/parallel.hpp"
#include "mtm/process.hpp"
#include "mtm/rng.hpp"

namespace mtm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParameterError("method option " + key + " expects a number, got '" + v + "'");
  }
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  double d = parse_number(key, v);
  if (d < 0 || d != std::floor(d)) throw ParameterError("method option " + key + " expects a nonnegative integer");
  return static_cast<std::size_t>(d);
}

nlohmann::ordered_json num_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

MethodSpec parse_method_spec(const std::string& text) {
  MethodSpec spec;
  spec.label = text;
  std::string name = text, opts;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    opts = text.substr(colon + 1);
  }
  if (name == "periodogram")
    spec.method = Method::Periodogram;
  else if (name == "single")
    spec.method = Method::Single;
  else if (name == "mt")
    spec.method = Method::Multitaper;
  else if (name == "mt-fast")
    spec.method = Method::MultitaperApprox;
  else if (name == "adaptive")
    spec.method = Method::Adaptive;
  else
    throw ParameterError("unknown method '" + name + "'");

  std::stringstream ss(opts);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParameterError("method option '" + item + "' needs key=value");
    std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "k")
      spec.k = parse_count(key, val);
    else if (key == "delta")
      spec.delta = parse_number(key, val);
    else if (key == "w")
      spec.w = parse_number(key, val);
    else if (key == "eps")
      spec.epsilon = parse_number(key, val);
    else if (key == "taper")
      spec.taper = parse_count(key, val);
    else if (key == "tol")
      spec.adaptive.tol = parse_number(key, val);
    else if (key == "max_iter")
      spec.adaptive.max_iter = parse_count(key, val);
    else
      throw ParameterError("unknown method option '" + key + "'");
  }
  return spec;
}

EstimatorSuite::EstimatorSuite(std::size_t n, double w, std::size_t l, std::vector<MethodSpec> methods)
    : n_(n), l_(l), methods_(std::move(methods)) {
  if (n == 0) throw ParameterError("n must be positive");
  if (l < n) throw ParameterError("grid size l must be at least n");
  ks_.resize(methods_.size());
  ws_.resize(methods_.size());
  std::map<double, std::size_t> need;
  for (std::size_t i = 0; i < methods_.size(); ++i) {
    const MethodSpec& m = methods_[i];
    double mw = m.w.value_or(w);
    ws_[i] = mw;
    if (m.method == Method::Periodogram) {
      ks_[i] = 1;
      continue;
    }
    validate_bandwidth(mw);
    Shared& sh = by_w_[mw];
    if (!sh.solver) sh.solver = std::make_unique<DpssSolver>(n, mw);
    std::size_t k = 0;
    if (m.method == Method::Single) {
      k = m.taper + 1;
      if (k > n) throw ParameterError("taper index exceeds n");
    } else if (m.k && m.delta) {
      throw ParameterError("give either k or delta for method '" + m.label + "', not both");
    } else if (m.k) {
      k = *m.k;
    } else if (m.delta) {
      k = select_num_tapers(*sh.solver, *m.delta);
    } else {
      throw ParameterError("method '" + m.label + "' needs k=... or delta=...");
    }
    if (k < 1 || k > n) throw ParameterError("taper count for '" + m.label + "' must lie in [1, n]");
    ks_[i] = m.method == Method::Single ? 1 : k;
    if (m.method == Method::MultitaperApprox)
      plans_.emplace(i, plan_transition(*sh.solver, k, m.epsilon));
    else
      need[mw] = std::max(need[mw], k);
  }
  for (auto& [mw, count] : need) by_w_[mw].bank = build_taper_bank(*by_w_[mw].solver, 0, count);
}

std::vector<double> EstimatorSuite::eigenvalues(std::size_t i) const {
  const MethodSpec& m = methods_[i];
  if (m.method == Method::Periodogram) return {};
  const Shared& sh = by_w_.at(ws_[i]);
  if (m.method == Method::Single) return {sh.bank.eigenvalues[m.taper]};
  if (m.method == Method::MultitaperApprox) {
    std::vector<double> out(ks_[i]);
    for (std::size_t j = 0; j < ks_[i]; ++j) out[j] = sh.solver->eigenvalue(j);
    return out;
  }
  return {sh.bank.eigenvalues.begin(), sh.bank.eigenvalues.begin() + static_cast<std::ptrdiff_t>(ks_[i])};
}

const IndexPartition* EstimatorSuite::partition(std::size_t i) const {
  auto it = plans_.find(i);
  return it == plans_.end() ? nullptr : &it->second.partition;
}

const TaperBank* EstimatorSuite::bank_for(std::size_t i) const {
  if (methods_[i].method == Method::Periodogram || methods_[i].method == Method::MultitaperApprox) return nullptr;
  return &by_w_.at(ws_[i]).bank;
}

std::vector<double> EstimatorSuite::run(std::size_t i, std::span<const cplx> x) const {
  const MethodSpec& m = methods_[i];
  switch (m.method) {
    case Method::Periodogram:
      return periodogram(x, l_).values;
    case Method::Single:
      return tapered_periodogram(x, by_w_.at(ws_[i]).bank.taper(m.taper), l_).values;
    case Method::Multitaper:
      return multitaper_exact(x, by_w_.at(ws_[i]).bank, ks_[i], l_).values;
    case Method::Adaptive:
      return adaptive_multitaper(x, by_w_.at(ws_[i]).bank, ks_[i], l_, m.adaptive).estimate.values;
    case Method::MultitaperApprox: {
      const TransitionPlan& p = plans_.at(i);
      return multitaper_approx(x, p.transition, p.partition, ws_[i], ks_[i], l_).values;
    }
  }
  throw ParameterError("unknown method");
}

SimulationReport simulate(const PsdModel& psd, const SimulationConfig& cfg) {
  if (cfg.trials < 1) throw ParameterError("trials must be at least 1");
  if (cfg.methods.empty()) throw ParameterError("no methods to simulate");
  const std::size_t n = cfg.n, l = cfg.l;
  ProcessSampler sampler(psd, n, cfg.seed);
  EstimatorSuite suite(n, cfg.w, l, cfg.methods);
  const std::size_t nm = suite.size();

  SimulationReport rep;
  rep.config = cfg;
  switch (sampler.route()) {
    case ProcessSampler::Route::Circulant:
      rep.sampler_route = "circulant";
      break;
    case ProcessSampler::Route::DenseCholesky:
      rep.sampler_route = "dense-cholesky";
      break;
    case ProcessSampler::Route::DenseEigen:
      rep.sampler_route = "dense-eigen";
      break;
  }
  rep.mc_reliable = cfg.trials >= 30;
  rep.truth.resize(l);
  for (std::size_t j = 0; j < l; ++j) rep.truth[j] = psd.value(static_cast<double>(j) / static_cast<double>(l));

  std::vector<std::size_t> probe_bins;
  for (double f : cfg.probes) {
    double pos = f - std::floor(f);
    probe_bins.push_back(static_cast<std::size_t>(std::llround(pos * static_cast<double>(l))) % l);
  }

  std::vector<std::vector<Moments>> moments(nm, std::vector<Moments>(l));
  std::vector<std::vector<double>> mld_sum(nm, std::vector<double>(l, 0.0));
  std::vector<std::vector<std::vector<double>>> probe_values(
      nm, std::vector<std::vector<double>>(probe_bins.size()));

  const std::size_t workers = cfg.workers ? cfg.workers : default_workers();
  const std::size_t lanes = 16;
  const std::size_t block = std::max<std::size_t>(lanes * workers, 32);
  std::vector<std::vector<cplx>> signals;
  std::vector<std::vector<std::vector<double>>> results;
  for (std::size_t first = 0; first < cfg.trials; first += block) {
    const std::size_t count = std::min(block, cfg.trials - first);
    signals.assign(count, {});
    const std::size_t batches = (count + lanes - 1) / lanes;
    parallel_for(batches, [&](std::size_t b) {
      std::size_t s = b * lanes, c = std::min(lanes, count - s);
      auto xs = sampler.draw(first + s, c);
      for (std::size_t i = 0; i < c; ++i) signals[s + i] = std::move(xs[i]);
    }, workers);
    results.assign(count, std::vector<std::vector<double>>(nm));
    parallel_for(count * nm, [&](std::size_t job) {
      std::size_t t = job / nm, m = job % nm;
      results[t][m] = suite.run(m, signals[t]);
    }, workers);
    for (std::size_t t = 0; t < count; ++t) {
      for (std::size_t m = 0; m < nm; ++m) {
        const std::vector<double>& v = results[t][m];
        for (std::size_t j = 0; j < l; ++j) {
          moments[m][j].add(v[j]);
          double s = rep.truth[j];
          mld_sum[m][j] += mean_log_deviation(std::span<const double>(&v[j], 1), std::span<const double>(&s, 1))[0];
        }
        for (std::size_t p = 0; p < probe_bins.size(); ++p) probe_values[m][p].push_back(v[probe_bins[p]]);
      }
    }
  }

  const double trials = static_cast<double>(cfg.trials);
  for (std::size_t m = 0; m < nm; ++m) {
    MethodSummary ms;
    ms.label = suite.method(m).label;
    ms.k = suite.taper_count(m);
    ms.w = suite.bandwidth(m);
    ms.mean.resize(l);
    ms.variance.resize(l);
    ms.mld.resize(l);
    double total = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      ms.mean[j] = moments[m][j].mean;
      ms.variance[j] = moments[m][j].variance();
      ms.mld[j] = mld_sum[m][j] / trials;
      total += ms.mld[j];
    }
    ms.average_mld = total / static_cast<double>(l);
    for (auto [a, b] : cfg.bands) {
      double s = 0.0;
      std::size_t c = 0;
      for (std::size_t j = 0; j < l; ++j) {
        double f = static_cast<double>(j) / static_cast<double>(l);
        if (f >= a && f <= b) {
          s += ms.mld[j];
          ++c;
        }
      }
      ms.band_mld.push_back(c ? s / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN());
    }

    const bool exact_mt = suite.method(m).method == Method::Multitaper;
    std::vector<double> eig;
    if (exact_mt) eig = suite.eigenvalues(m);
    for (std::size_t p = 0; p < probe_bins.size(); ++p) {
      ProbeSummary ps;
      ps.bin = probe_bins[p];
      ps.f = static_cast<double>(ps.bin) / static_cast<double>(l);
      ps.truth = psd.value(ps.f);
      const std::vector<double>& vals = probe_values[m][p];
      Moments mo;
      for (double v : vals) mo.add(v);
      ps.mean = mo.mean;
      ps.bias = mo.mean - ps.truth;
      ps.variance = mo.variance();
      ps.bias_se = cfg.trials > 1 ? mo.std_error() : std::numeric_limits<double>::quiet_NaN();
      if (cfg.trials > 1 && ps.variance > 0.0) {
        double m4 = 0.0;
        for (double v : vals) m4 += std::pow(v - mo.mean, 4);
        m4 /= trials;
        double s2 = ps.variance;
        ps.variance_rel_se = std::sqrt(std::max(m4 - s2 * s2, 0.0) / trials) / s2;
      } else {
        ps.variance_rel_se = std::numeric_limits<double>::quiet_NaN();
      }
      if (exact_mt) {
        ps.bounds = make_bound_report(psd, eig, n, ms.w, ms.k, ps.f);
        if (cfg.trials > 1) {
          ps.bias_within = std::abs(ps.bias) <= ps.bounds->bias_general + 3.0 * ps.bias_se;
          ps.variance_within = ps.variance <= ps.bounds->variance * (1.0 + 3.0 * ps.variance_rel_se);
        }
      }
      ms.probes.push_back(std::move(ps));
    }
    rep.methods.push_back(std::move(ms));
  }
  return rep;
}

std::string to_json(const SimulationReport& rep) {
  nlohmann::ordered_json j;
  j["n"] = rep.config.n;
  j["l"] = rep.config.l;
  j["w"] = rep.config.w;
  j["seed"] = rep.config.seed;
  j["trials"] = rep.config.trials;
  j["sampler"] = rep.sampler_route;
  j["mc_reliable"] = rep.mc_reliable;
  j["methods"] = nlohmann::ordered_json::array();
  for (const MethodSummary& m : rep.methods) {
    nlohmann::ordered_json mj;
    mj["label"] = m.label;
    mj["k"] = m.k;
    mj["w"] = m.w;
    mj["average_mld_db"] = num_or_null(m.average_mld);
    if (!rep.config.bands.empty()) {
      mj["bands"] = nlohmann::ordered_json::array();
      for (std::size_t b = 0; b < rep.config.bands.size(); ++b)
        mj["bands"].push_back({{"start", rep.config.bands[b].first}, {"end", rep.config.bands[b].second},
                               {"average_mld_db", num_or_null(m.band_mld[b])}});
    }
    mj["probes"] = nlohmann::ordered_json::array();
    for (const ProbeSummary& p : m.probes) {
      nlohmann::ordered_json pj;
      pj["f"] = p.f;
      pj["truth"] = p.truth;
      pj["mean"] = p.mean;
      pj["bias"] = p.bias;
      pj["bias_se"] = num_or_null(p.bias_se);
      pj["variance"] = p.variance;
      pj["variance_rel_se"] = num_or_null(p.variance_rel_se);
      pj["mc_error_reliable"] = rep.mc_reliable;
      if (p.bounds) {
        pj["bias_bound_general"] = p.bounds->bias_general;
        pj["bias_bound_smooth"] = p.bounds->bias_smooth ? num_or_null(*p.bounds->bias_smooth) : nlohmann::ordered_json(nullptr);
        pj["variance_bound"] = p.bounds->variance;
        pj["kappa_lower"] = p.bounds->kappa_lower;
        pj["kappa_vacuous"] = p.bounds->kappa_vacuous;
      }
      if (p.bias_within) pj["bias_within_bound"] = *p.bias_within;
      if (p.variance_within) pj["variance_within_bound"] = *p.variance_within;
      mj["probes"].push_back(pj);
    }
    j["methods"].push_back(mj);
  }
  return j.dump(2);
}

std::string plot_csv(const SimulationReport& rep) {
  std::ostringstream os;
  os << "frequency,truth";
  for (const MethodSummary& m : rep.methods) os << ',' << m.label << " mean," << m.label << " mld_db";
  os << '\n';
  char buf[40];
  for (std::size_t j = 0; j < rep.truth.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(j) / static_cast<double>(rep.config.l));
    os << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", rep.truth[j]);
    os << buf;
    for (const MethodSummary& m : rep.methods) {
      std::snprintf(buf, sizeof buf, ",%.17g", m.mean[j]);
      os << buf;
      std::snprintf(buf, sizeof buf, ",%.17g", m.mld[j]);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

BenchRow bench_point(std::size_t n, const BenchOptions& opts) {
  BenchRow row;
  row.n = n;
  row.w = 0.08 * std::pow(static_cast<double>(n), -0.2);
  row.l = std::max(n, static_cast<std::size_t>(std::llround(opts.l_factor * static_cast<double>(n))));
  {
    DpssSolver probe(n, row.w);
    row.k = select_num_tapers(probe, opts.delta);
  }

  std::vector<cplx> x(n);
  CounterStream stream(opts.seed, n);
  for (std::size_t i = 0; i < n; ++i) x[i] = stream.complex_normal(i);

  auto time_compute = [&](auto&& fn) {
    std::size_t reps = 0;
    auto t0 = Clock::now();
    double best = std::numeric_limits<double>::infinity();
    double total = 0.0;
    do {
      auto t1 = Clock::now();
      fn();
      double dt = seconds_since(t1);
      best = std::min(best, dt);
      total = seconds_since(t0);
      ++reps;
    } while (total < opts.min_time || reps < 3);
    return best;
  };

  if (n <= opts.exact_max_n) {
    auto t0 = Clock::now();
    DpssSolver solver(n, row.w);
    TaperBank bank = build_taper_bank(solver, 0, row.k);
    row.exact_precompute_seconds = seconds_since(t0);
    SpectralEstimate e = multitaper_exact(x, bank, row.k, row.l);
    row.exact_fft_count = e.meta.fft_count;
    row.exact_compute_seconds = time_compute([&] { (void)multitaper_exact(x, bank, row.k, row.l); });
  }

  for (double eps : opts.epsilons) {
    BenchApprox a;
    a.epsilon = eps;
    auto t0 = Clock::now();
    DpssSolver solver(n, row.w);
    TransitionPlan plan = plan_transition(solver, row.k, eps);
    a.precompute_seconds = seconds_since(t0);
    a.partition = plan.partition;
    a.width_bound = transition_width_bound(n, row.w, eps);
    SpectralEstimate e = multitaper_approx(x, plan.transition, plan.partition, row.w, row.k, row.l);
    a.fft_count = e.meta.fft_count;
    a.fft_length_equivalents = e.meta.fft_length_equivalents;
    a.compute_seconds = time_compute([&] {
      (void)multitaper_approx(x, plan.transition, plan.partition, row.w, row.k, row.l);
    });
    row.approx.push_back(a);
  }
  return row;
}

double fit_exponent(std::span<const double> n, std::span<const double> t) {
  if (n.size() != t.size() || n.size() < 2) throw ParameterError("need at least two points to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    double lx = std::log(n[i]), ly = std::log(t[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace mtm
