// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtm/bounds.hpp"
#include "mtm/dpss.hpp"
#include "mtm/error.hpp"
#include "mtm/estimators.hpp"
#include "mtm/fast_multitaper.hpp"
#include "mtm/io.hpp"
#include "mtm/montecarlo.hpp"
#include "mtm/parallel.hpp"
#include "mtm/simd.hpp"

namespace fs = std::filesystem;
using namespace mtm;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumerical = 4;

struct TaperCount {
  std::optional<std::size_t> k;
  std::optional<double> delta;
};

// Exactly one of the two is enforced when the count is resolved.
void add_taper_count(CLI::App* cmd, TaperCount& tc) {
  auto* k = cmd->add_option("--k", tc.k, "number of tapers");
  auto* d = cmd->add_option("--delta", tc.delta, "choose the largest k with 1 - lambda_(k-1) <= delta");
  k->excludes(d);
}

std::size_t resolve_k(const DpssSolver& solver, const TaperCount& tc) {
  if (tc.k) {
    if (*tc.k < 1 || *tc.k > solver.n()) throw ParameterError("--k must lie in [1, n]");
    return *tc.k;
  }
  if (tc.delta) return select_num_tapers(solver, *tc.delta);
  throw ParameterError("exactly one of --k or --delta is required");
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to path, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw InputError("failed writing " + path);
}

// Loads a cached bank when it matches (n, w) and holds enough tapers;
// otherwise computes and, if a path was given, refreshes the cache.
TaperBank bank_with_cache(const DpssSolver& solver, std::size_t k, const std::string& cache) {
  if (!cache.empty() && fs::exists(cache)) {
    try {
      TaperBank b = read_bank(cache);
      if (b.n == solver.n() && b.w == solver.w() && b.k_computed() >= k) return b;
    } catch (const InputError&) {
    }
  }
  TaperBank b = build_taper_bank(solver, 0, k);
  if (!cache.empty()) write_bank(cache, b);
  return b;
}

struct DpssArgs {
  std::size_t n = 0;
  double w = 0.0;
  TaperCount tc;
  std::string out, bank;
};

int cmd_dpss(const DpssArgs& a) {
  validate_bandwidth(a.w);
  DpssSolver solver(a.n, a.w);
  std::size_t k = resolve_k(solver, a.tc);
  TaperBank bank = build_taper_bank(solver, 0, k);
  if (!a.bank.empty()) write_bank(a.bank, bank);
  std::ostringstream os;
  os << "k,lambda,one_minus_lambda\n";
  for (std::size_t i = 0; i < k; ++i)
    os << i << ',' << fmt17(bank.eigenvalues[i]) << ',' << fmt17(1.0 - bank.eigenvalues[i]) << '\n';
  emit(a.out, os.str());
  std::cerr << "n=" << a.n << " w=" << fmt17(a.w) << " K=" << k << " floor(2nw)=" << floor_2nw(a.n, a.w) << '\n';
  return 0;
}

struct EstimateArgs {
  std::string input, in_format, out, out_format, method = "mt", bank;
  std::optional<std::size_t> n, l;
  double w = 0.0;
  TaperCount tc;
  double eps = 1e-9;
  std::size_t taper = 0;
  AdaptiveOptions adaptive;
};

int cmd_estimate(const EstimateArgs& a) {
  FileFormat in_fmt = a.in_format.empty() ? format_from_extension(a.input) : parse_format(a.in_format);
  std::vector<cplx> x = read_samples(a.input, in_fmt);
  if (x.empty()) throw InputError("input holds no samples");
  if (a.n && *a.n != x.size())
    throw InputError("input holds " + std::to_string(x.size()) + " samples but --n is " + std::to_string(*a.n));
  const std::size_t n = x.size();
  const std::size_t l = a.l.value_or(n);
  if (l < n) throw ParameterError("--l must be at least n");

  SpectralEstimate est;
  if (a.method == "periodogram") {
    est = periodogram(x, l);
  } else {
    if (a.w == 0.0) throw ParameterError("--w is required for method " + a.method);
    validate_bandwidth(a.w);
    DpssSolver solver(n, a.w);
    if (a.method == "single") {
      TaperBank bank = bank_with_cache(solver, a.taper + 1, a.bank);
      est = tapered_periodogram(x, bank.taper(a.taper), l);
      est.method = Method::Single;
      est.meta.w = a.w;
      est.meta.k = 1;
    } else {
      std::size_t k = resolve_k(solver, a.tc);
      if (a.method == "mt") {
        est = multitaper_exact(x, bank_with_cache(solver, k, a.bank), k, l);
      } else if (a.method == "adaptive") {
        est = adaptive_multitaper(x, bank_with_cache(solver, k, a.bank), k, l, a.adaptive).estimate;
      } else if (a.method == "mt-fast") {
        TransitionPlan plan = plan_transition(solver, k, a.eps);
        est = multitaper_approx(x, plan.transition, plan.partition, a.w, k, l);
      } else {
        throw ParameterError("unknown method '" + a.method + "'");
      }
    }
  }
  FileFormat out_fmt = a.out_format.empty() ? format_from_extension(a.out) : parse_format(a.out_format);
  write_estimate(a.out, est, out_fmt);
  if (out_fmt != FileFormat::Json) emit(a.out + ".json", estimate_meta_json(est) + "\n");
  return 0;
}

struct WindowArgs {
  std::size_t n = 0;
  std::optional<std::size_t> l;
  double w = 0.0;
  TaperCount tc;
  std::string out;
};

int cmd_window(const WindowArgs& a) {
  validate_bandwidth(a.w);
  const std::size_t l = a.l.value_or(8 * a.n);
  if (l < a.n) throw ParameterError("--l must be at least n");
  DpssSolver solver(a.n, a.w);
  std::size_t k = resolve_k(solver, a.tc);
  TaperBank bank = build_taper_bank(solver, 0, k);
  std::vector<double> win = spectral_window(bank, k, l);
  std::ostringstream os;
  os << "frequency,value\n";
  for (std::size_t j = 0; j < l; ++j)
    os << fmt17(static_cast<double>(j) / static_cast<double>(l)) << ',' << fmt17(win[j]) << '\n';
  emit(a.out, os.str());
  return 0;
}

struct BoundsArgs {
  std::string psd, format = "text", out;
  std::size_t n = 0;
  double w = 0.0;
  TaperCount tc;
  double f = 0.0;
  std::optional<double> f2;
  std::vector<double> betas;
};

int cmd_bounds(const BoundsArgs& a) {
  validate_bandwidth(a.w);
  auto psd = load_psd(a.psd);
  DpssSolver solver(a.n, a.w);
  std::size_t k = resolve_k(solver, a.tc);
  TaperBank bank = build_taper_bank(solver, 0, k);
  BoundReport rep = make_bound_report(*psd, bank.eigenvalues, a.n, a.w, k, a.f, a.f2);
  // a vacuous kappa leaves the trivial bound of 1 on both tails
  auto tails = [&](double beta) {
    TailBounds t = tail_probability(rep.kappa_lower > 0.0 ? rep.kappa_lower : 1.0, beta);
    return rep.kappa_lower > 0.0 ? t : TailBounds{};
  };
  std::string text;
  if (a.format == "json") {
    auto j = nlohmann::ordered_json::parse(to_json(rep));
    if (!a.betas.empty()) {
      j["tail"] = nlohmann::ordered_json::array();
      for (double beta : a.betas) {
        TailBounds t = tails(beta);
        j["tail"].push_back({{"beta", beta}, {"upper", t.upper}, {"lower", t.lower}});
      }
    }
    text = j.dump(2) + "\n";
  } else if (a.format == "text") {
    text = to_text(rep);
    for (double beta : a.betas) {
      TailBounds t = tails(beta);
      text += "tail_beta=" + fmt17(beta) + " upper=" + fmt17(t.upper) + " lower=" + fmt17(t.lower) + "\n";
    }
  } else {
    throw ParameterError("--format must be text or json");
  }
  emit(a.out, text);
  return 0;
}

struct SimulateArgs {
  std::string psd, out, plot;
  std::size_t n = 0;
  std::optional<std::size_t> l;
  double w = 0.0;
  std::vector<std::string> methods;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::vector<double> probes;
  std::vector<std::string> bands;
};

int cmd_simulate(const SimulateArgs& a) {
  auto psd = load_psd(a.psd);
  SimulationConfig cfg;
  cfg.n = a.n;
  cfg.l = a.l.value_or(a.n);
  cfg.w = a.w;
  cfg.seed = a.seed;
  cfg.trials = a.trials;
  cfg.probes = a.probes;
  for (const auto& m : a.methods) cfg.methods.push_back(parse_method_spec(m));
  for (const auto& b : a.bands) {
    auto colon = b.find(':');
    if (colon == std::string::npos) throw ParameterError("--band expects a:b, got '" + b + "'");
    try {
      cfg.bands.emplace_back(std::stod(b.substr(0, colon)), std::stod(b.substr(colon + 1)));
    } catch (const std::exception&) {
      throw ParameterError("--band expects numbers, got '" + b + "'");
    }
  }
  SimulationReport rep = simulate(*psd, cfg);
  emit(a.out, to_json(rep) + "\n");
  if (!a.plot.empty()) emit(a.plot, plot_csv(rep));
  return 0;
}

struct BenchArgs {
  std::vector<std::size_t> ns;
  BenchOptions opts;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  nlohmann::ordered_json j;
  j["machine"] = {{"hardware_threads", std::thread::hardware_concurrency()},
                  {"workers", default_workers()},
                  {"simd", std::string(simd::isa_name(simd::kernels().isa))}};
  j["delta"] = a.opts.delta;
  j["rows"] = nlohmann::ordered_json::array();
  std::printf("%10s %10s %6s %9s %12s %12s %8s %7s %8s %12s %12s\n", "n", "w", "K", "exact_fft", "exact_pre",
              "exact_comp", "eps", "i2+i3", "fft", "approx_pre", "approx_comp");
  for (std::size_t n : a.ns) {
    BenchRow row = bench_point(n, a.opts);
    nlohmann::ordered_json rj;
    rj["n"] = row.n;
    rj["l"] = row.l;
    rj["w"] = row.w;
    rj["k"] = row.k;
    if (row.exact_fft_count) {
      rj["exact"] = {{"fft_count", *row.exact_fft_count},
                     {"precompute_seconds", *row.exact_precompute_seconds},
                     {"compute_seconds", *row.exact_compute_seconds}};
    } else {
      rj["exact"] = nullptr;
    }
    rj["approx"] = nlohmann::ordered_json::array();
    for (const BenchApprox& ap : row.approx) {
      const IndexPartition& p = ap.partition;
      rj["approx"].push_back({{"epsilon", ap.epsilon},
                              {"i1", p.i1.size()},
                              {"i2", p.i2.size()},
                              {"i3", p.i3.size()},
                              {"i4", p.i4.size()},
                              {"width_bound", ap.width_bound},
                              {"fft_count", ap.fft_count},
                              {"fft_length_equivalents", ap.fft_length_equivalents},
                              {"precompute_seconds", ap.precompute_seconds},
                              {"compute_seconds", ap.compute_seconds}});
      std::printf("%10zu %10.3e %6zu %9s %12s %12s %8.0e %7zu %8llu %12.4e %12.4e\n", row.n, row.w, row.k,
                  row.exact_fft_count ? std::to_string(*row.exact_fft_count).c_str() : "-",
                  row.exact_precompute_seconds ? fmt17(*row.exact_precompute_seconds).substr(0, 10).c_str() : "-",
                  row.exact_compute_seconds ? fmt17(*row.exact_compute_seconds).substr(0, 10).c_str() : "-",
                  ap.epsilon, p.transition_count(), static_cast<unsigned long long>(ap.fft_count),
                  ap.precompute_seconds, ap.compute_seconds);
    }
    j["rows"].push_back(rj);
  }
  if (!a.out.empty()) emit(a.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitaper spectral estimation toolkit"};
  app.require_subcommand(1);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "worker threads (overrides SPECTRUM_THREADS)");

  DpssArgs dp;
  auto* dpss = app.add_subcommand("dpss", "compute Slepian tapers and eigenvalues");
  dpss->add_option("--n", dp.n, "sequence length")->required()->check(CLI::PositiveNumber);
  dpss->add_option("--w", dp.w, "half bandwidth in (0, 1/2)")->required();
  add_taper_count(dpss, dp.tc);
  dpss->add_option("--out,-o", dp.out, "eigenvalue CSV (default stdout)");
  dpss->add_option("--bank", dp.bank, "write the taper bank to this file");

  EstimateArgs es;
  auto* est = app.add_subcommand("estimate", "estimate a spectrum from samples");
  est->add_option("--input,-i", es.input, "samples: CSV re,im per line or raw f64 pairs")->required();
  est->add_option("--in-format", es.in_format, "csv or bin (default from extension)");
  est->add_option("--n", es.n, "expected sample count");
  est->add_option("--l", es.l, "grid size (default n)");
  est->add_option("--w", es.w, "half bandwidth");
  add_taper_count(est, es.tc);
  est->add_option("--method,-m", es.method, "periodogram, single, mt, mt-fast or adaptive")
      ->check(CLI::IsMember({"periodogram", "single", "mt", "mt-fast", "adaptive"}));
  est->add_option("--eps", es.eps, "tolerance of mt-fast");
  est->add_option("--taper", es.taper, "taper index for single");
  est->add_option("--tol", es.adaptive.tol, "adaptive stopping tolerance");
  est->add_option("--max-iter", es.adaptive.max_iter, "adaptive iteration cap");
  est->add_option("--bank", es.bank, "taper bank cache file");
  est->add_option("--out,-o", es.out, "output file")->required();
  est->add_option("--format", es.out_format, "csv, json or bin (default from extension)");

  WindowArgs wi;
  auto* win = app.add_subcommand("window", "spectral window of the multitaper estimator");
  win->add_option("--n", wi.n, "sequence length")->required()->check(CLI::PositiveNumber);
  win->add_option("--w", wi.w, "half bandwidth")->required();
  win->add_option("--l", wi.l, "grid size (default 8n)");
  add_taper_count(win, wi.tc);
  win->add_option("--out,-o", wi.out, "CSV output (default stdout)");

  BoundsArgs bo;
  auto* bnd = app.add_subcommand("bounds", "evaluate bias, variance and concentration bounds");
  bnd->add_option("--psd", bo.psd, "\"multiband\", inline JSON or a JSON file")->required();
  bnd->add_option("--n", bo.n, "sequence length")->required()->check(CLI::PositiveNumber);
  bnd->add_option("--w", bo.w, "half bandwidth")->required();
  add_taper_count(bnd, bo.tc);
  bnd->add_option("--f", bo.f, "frequency")->required();
  bnd->add_option("--f2", bo.f2, "second frequency for the covariance bound");
  bnd->add_option("--beta", bo.betas, "tail thresholds");
  bnd->add_option("--format", bo.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  bnd->add_option("--out,-o", bo.out, "output file (default stdout)");

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of estimators on a known spectrum");
  sim->add_option("--psd", si.psd, "\"multiband\", inline JSON or a JSON file")->required();
  sim->add_option("--n", si.n, "sequence length")->required()->check(CLI::PositiveNumber);
  sim->add_option("--l", si.l, "grid size (default n)");
  sim->add_option("--w", si.w, "half bandwidth")->required();
  sim->add_option("--method,-m", si.methods, "e.g. mt:k=29, mt:delta=1e-9, mt-fast:k=29,eps=1e-9")->required();
  sim->add_option("--trials", si.trials, "number of realizations")->check(CLI::PositiveNumber);
  sim->add_option("--seed", si.seed, "random seed");
  sim->add_option("--probe", si.probes, "frequencies compared against the bounds");
  sim->add_option("--band", si.bands, "a:b frequency band for averaged MLD");
  sim->add_option("--out,-o", si.out, "JSON report (default stdout)");
  sim->add_option("--plot", si.plot, "CSV of mean and MLD per frequency");

  BenchArgs be;
  auto* ben = app.add_subcommand("bench", "time exact against fast multitaper");
  ben->add_option("--n", be.ns, "sequence lengths")->required();
  ben->add_option("--delta", be.opts.delta, "taper selection threshold");
  ben->add_option("--eps", be.opts.epsilons, "tolerances for the fast path");
  ben->add_option("--exact-max-n", be.opts.exact_max_n, "largest n timed on the exact path");
  ben->add_option("--min-time", be.opts.min_time, "seconds of repeated compute per timing");
  ben->add_option("--seed", be.opts.seed, "random seed of the test signal");
  ben->add_option("--out,-o", be.out, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  if (threads) setenv("SPECTRUM_THREADS", std::to_string(*threads).c_str(), 1);

  try {
    if (*dpss) return cmd_dpss(dp);
    if (*est) return cmd_estimate(es);
    if (*win) return cmd_window(wi);
    if (*bnd) return cmd_bounds(bo);
    if (*sim) return cmd_simulate(si);
    if (*ben) return cmd_bench(be);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InapplicableError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
