#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "mtm/bounds.hpp"
#include "mtm/dpss.hpp"
#include "mtm/error.hpp"
#include "mtm/process.hpp"
#include "mtm/psd.hpp"
#include "oracles.hpp"

using namespace mtm;

namespace {

LocalPsdStats flat_stats(double c) {
  LocalPsdStats s;
  s.m_f = s.big_m_f = s.a_f = s.r_f = s.big_m = c;
  s.m2_f = 0.0;
  return s;
}

// Exact mean and variance of the multitaper estimate of a CN(0, R) process:
// with G = V^T E_f^* R E_f V, the mean is tr(G)/k and the variance ||G||_F^2/k^2.
std::pair<double, double> exact_moments(const PsdModel& psd, const TaperBank& bank, std::size_t k, double f) {
  const std::size_t n = bank.n;
  std::vector<cplx> u(k * n);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t t = 0; t < n; ++t)
      u[i * n + t] = bank.taper(i)[t] * std::polar(1.0, 2.0 * oracle::kPi * f * static_cast<double>(t));
  std::vector<cplx> r(n);
  for (std::size_t d = 0; d < n; ++d) r[d] = autocorrelation(psd, static_cast<std::int64_t>(d));
  auto entry = [&](std::size_t a, std::size_t b) { return a >= b ? r[a - b] : std::conj(r[b - a]); };
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<cplx> ru(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) ru[a] += entry(a, b) * u[i * n + b];
    for (std::size_t j = 0; j < k; ++j) {
      cplx g = 0.0;
      for (std::size_t a = 0; a < n; ++a) g += std::conj(u[j * n + a]) * ru[a];
      if (i == j) mean += g.real();
      var += std::norm(g);
    }
  }
  return {mean / static_cast<double>(k), var / static_cast<double>(k * k)};
}

}  // namespace

TEST_CASE("sigma statistics") {
  std::vector<double> ones{1.0, 1.0, 1.0};
  SigmaStats a = sigma_stats(ones, 3);
  CHECK(a.sigma1 == 0.0);
  CHECK(a.sigma2 == 0.0);
  std::vector<double> lam{1.0, 1.0, 0.5};
  SigmaStats b = sigma_stats(lam, 3);
  CHECK(b.sigma1 == doctest::Approx(1.0 / 6.0));
  CHECK(b.sigma2 == doctest::Approx(std::sqrt(1.0 / 12.0)));
  CHECK(b.lambda_last == 0.5);
  CHECK_THROWS_AS(sigma_stats(lam, 4), ParameterError);
  CHECK_THROWS_AS(sigma_stats(lam, 0), ParameterError);
}

TEST_CASE("sigma chain holds for computed banks") {
  TaperBank bank = build_taper_bank(2000, 0.01, 42);
  for (std::size_t k = 1; k <= 42; ++k) {
    SigmaStats s = sigma_stats(bank.eigenvalues, k);
    CHECK(0.0 <= s.sigma1);
    // eigenvalues within rounding of 1 are not ordered, hence the absolute slack
    CHECK(s.sigma1 <= s.sigma2 * (1.0 + 1e-12) + 1e-15);
    CHECK(s.sigma2 <= (1.0 - s.lambda_last) * (1.0 + 1e-12) + 1e-15);
    CHECK(1.0 - s.lambda_last <= 1.0);
  }
  SigmaStats s29 = sigma_stats(bank.eigenvalues, 29);
  CHECK(s29.sigma2 <= 1e-9);
}

TEST_CASE("local statistics of the multiband fixture") {
  PiecewisePsd s = multiband_fixture();
  LocalPsdStats a = local_psd_stats(s, 0.30, 0.01);
  CHECK(a.m_f == 1e9);
  CHECK(a.a_f == doctest::Approx(1e9));
  CHECK(a.big_m == 1e9);
  REQUIRE(a.m2_f);
  CHECK(*a.m2_f == 0.0);
  LocalPsdStats b = local_psd_stats(s, 0.22, 0.01);
  CHECK_FALSE(b.m2_f);
  CHECK(b.m_f <= b.a_f);
  CHECK(b.a_f <= b.big_m_f);
  CHECK(b.m_f <= b.r_f);
  CHECK(b.r_f <= b.big_m_f);
}

TEST_CASE("bound formulas") {
  SigmaStats sig;
  sig.sigma1 = 0.01;
  sig.sigma2 = 0.02;
  sig.k = 10;
  sig.lambda_last = 0.97;
  LocalPsdStats st;
  st.m_f = 2.0;
  st.big_m_f = 5.0;
  st.a_f = 3.0;
  st.r_f = 3.5;
  st.big_m = 100.0;
  st.m2_f = 40.0;
  st.f = 0.1;
  const std::size_t n = 1000, k = 10;
  const double w = 0.006;
  CHECK(bias_bound_smooth(st, sig, n, w, k) ==
        doctest::Approx(40.0 * n * w * w * w / (3.0 * k) + (100.0 + 5.0) * 0.01));
  CHECK(bias_bound_general(st, sig) == doctest::Approx(3.0 * 0.99 + 100.0 * 0.01));
  CHECK(variance_bound(st, sig, n, w, k) == doctest::Approx(std::pow(3.5 * std::sqrt(12.0 / 10.0) + 100.0 * 0.02, 2) / 10.0));
  LocalPsdStats st2 = st;
  st2.r_f = 1.5;
  st2.f = 0.4;
  CHECK(covariance_bound(st, st2, sig, n, w, k) ==
        doctest::Approx(std::pow(5.0 * std::sqrt(1.2 * 0.01) + 100.0 * 0.01, 2)));
  CHECK(covariance_bound(st, st2, sig, n, w, k) == covariance_bound(st2, st, sig, n, w, k));
  CHECK(kappa_lower_bound(st, sig, n, w, k) ==
        doctest::Approx((10.0 * 0.99 * 5.0 - 12.0 * 2.0) / (5.0 + 95.0 * 0.03)));
}

TEST_CASE("bound degenerate cases") {
  SigmaStats zero;
  zero.k = 8;
  zero.lambda_last = 1.0;
  LocalPsdStats flat = flat_stats(2.0);
  CHECK(bias_bound_smooth(flat, zero, 100, 0.04, 8) == 0.0);
  CHECK(bias_bound_general(flat, zero) == 0.0);
  CHECK(kappa_lower_bound(flat, zero, 100, 0.04, 8) == doctest::Approx(8.0));
  // sigma2 = 0, k = 2nw collapses the variance bound to c^2 / k
  CHECK(variance_bound(flat, zero, 100, 0.04, 8) == doctest::Approx(4.0 / 8.0));
  SigmaStats deg;
  deg.sigma1 = 1.0;
  deg.k = 4;
  LocalPsdStats st;
  st.m_f = 1.0;
  st.big_m_f = 3.0;
  st.big_m = 9.0;
  CHECK(bias_bound_general(st, deg) == doctest::Approx(9.0));
  SigmaStats s1;
  s1.sigma1 = 0.1;
  s1.k = 8;
  s1.lambda_last = 0.8;
  CHECK(bias_bound_general(flat, s1) == doctest::Approx(0.2));
  CHECK(bias_bound_smooth(flat, s1, 100, 0.04, 8) == doctest::Approx(0.4));
  LocalPsdStats flat4 = flat_stats(2.0);
  flat4.big_m = 4.0;
  CHECK(kappa_lower_bound(flat4, s1, 100, 0.04, 8) == doctest::Approx(8.0 * 0.9 / (1.0 + 1.0 * 0.2)));
  LocalPsdStats far = flat;
  far.f = 0.5;
  CHECK(covariance_bound(flat, far, zero, 100, 0.04, 8) == 0.0);
}

TEST_CASE("bound preconditions") {
  SigmaStats sig;
  sig.k = 4;
  sig.lambda_last = 1.0;
  LocalPsdStats st = flat_stats(1.0);
  st.m2_f.reset();
  CHECK_THROWS_AS(bias_bound_smooth(st, sig, 100, 0.05, 4), InapplicableError);
  LocalPsdStats a = local_psd_stats(multiband_fixture(), 0.2, 0.01);
  LocalPsdStats b = local_psd_stats(multiband_fixture(), 0.215, 0.01);
  CHECK_THROWS_AS(covariance_bound(a, b, sig, 2000, 0.01, 29), InapplicableError);
  LocalPsdStats c = local_psd_stats(multiband_fixture(), 0.19, 0.01);
  LocalPsdStats d = local_psd_stats(multiband_fixture(), 0.999, 0.01);  // 0.191 apart the other way
  CHECK_NOTHROW(covariance_bound(c, d, sig, 2000, 0.01, 29));
  LocalPsdStats e = local_psd_stats(multiband_fixture(), 0.205, 0.01);
  CHECK_THROWS_AS(covariance_bound(e, local_psd_stats(multiband_fixture(), 0.19, 0.01), sig, 2000, 0.01, 29),
                  InapplicableError);
  LocalPsdStats zero = flat_stats(0.0);
  CHECK_THROWS_AS(kappa_lower_bound(zero, sig, 100, 0.05, 4), InapplicableError);
  CHECK(circular_distance(0.95, 0.05) == doctest::Approx(0.1));
  CHECK(circular_distance(0.2, 0.8) == doctest::Approx(0.4));
}

TEST_CASE("bounds grow with the global maximum") {
  TaperBank bank = build_taper_bank(512, 0.02, 18);
  SigmaStats sig = sigma_stats(bank.eigenvalues, 18);
  LocalPsdStats st = local_psd_stats(multiband_fixture(), 0.5, 0.02);
  LocalPsdStats st2 = st;
  st2.big_m *= 2.0;
  LocalPsdStats other = local_psd_stats(multiband_fixture(), 0.1, 0.02);
  LocalPsdStats other2 = other;
  other2.big_m *= 2.0;
  CHECK(bias_bound_general(st2, sig) >= bias_bound_general(st, sig));
  CHECK(bias_bound_smooth(st2, sig, 512, 0.02, 18) >= bias_bound_smooth(st, sig, 512, 0.02, 18));
  CHECK(variance_bound(st2, sig, 512, 0.02, 18) >= variance_bound(st, sig, 512, 0.02, 18));
  CHECK(covariance_bound(st2, other2, sig, 512, 0.02, 18) >= covariance_bound(st, other, sig, 512, 0.02, 18));
  // kappa is a lower bound, so it must not increase
  CHECK(kappa_lower_bound(st2, sig, 512, 0.02, 18) <= kappa_lower_bound(st, sig, 512, 0.02, 18));
}

TEST_CASE("variance bound decreases in k") {
  SigmaStats sig;
  sig.sigma2 = 1e-3;
  LocalPsdStats st = flat_stats(2.0);
  double prev = variance_bound(st, sig, 1000, 0.01, 5);
  for (std::size_t k = 6; k < 20; ++k) {
    double v = variance_bound(st, sig, 1000, 0.01, k);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("tail probabilities") {
  TailBounds t = tail_probability(10.0, 2.0);
  CHECK(t.upper == doctest::Approx(0.5 * std::exp(-10.0 * (1.0 - std::log(2.0)))));
  CHECK(t.upper == doctest::Approx(0.02323).epsilon(1e-3));
  CHECK(t.lower == 1.0);
  TailBounds lo = tail_probability(10.0, 0.5);
  CHECK(lo.upper == 1.0);
  CHECK(lo.lower == doctest::Approx(std::exp(-10.0 * (-0.5 - std::log(0.5)))));
  CHECK(tail_probability(10.0, 1.0 + 1e-9).upper == doctest::Approx(1.0).epsilon(1e-6));
  double prev = 1.0;
  for (double kappa : {1.0, 2.0, 5.0, 20.0}) {
    double v = tail_probability(kappa, 1.5).upper;
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(tail_probability(10.0, 1.0), ParameterError);
  CHECK_THROWS_AS(tail_probability(10.0, -1.0), ParameterError);
  CHECK_THROWS_AS(tail_probability(-1.0, 2.0), ParameterError);
}

TEST_CASE("exact mean and variance sit inside the bounds") {
  const std::size_t n = 128;
  const double w = 0.05;
  TaperBank bank = build_taper_bank(n, w, 14);
  PiecewisePsd mb = multiband_fixture();
  PiecewisePsd flat = flat_psd(3.0);
  for (const PsdModel* psd : {static_cast<const PsdModel*>(&mb), static_cast<const PsdModel*>(&flat)}) {
    for (std::size_t k : {6u, 10u, 12u}) {
      std::vector<cplx> r(n);
      for (std::size_t d = 0; d < n; ++d) r[d] = autocorrelation(*psd, static_cast<std::int64_t>(d));
      for (double f : {0.1, 0.2, 0.3, 0.45, 0.8}) {
        CAPTURE(k);
        CAPTURE(f);
        auto [mean, var] = exact_moments(*psd, bank, k, f);
        double slack = 1e-9 * psd->global_max();
        CHECK(std::abs(expected_multitaper(r, bank, k, f) - mean) <= 1e-12 * psd->global_max());
        BoundReport rep = make_bound_report(*psd, bank.eigenvalues, n, w, k, f);
        CHECK(std::abs(mean - psd->value(f)) <= rep.bias_general + slack);
        if (rep.bias_smooth) CHECK(std::abs(mean - psd->value(f)) <= *rep.bias_smooth + slack);
        CHECK(var <= rep.variance * (1.0 + 1e-9) + slack * slack);
      }
    }
  }
}

TEST_CASE("bound report serialization") {
  TaperBank bank = build_taper_bank(2000, 0.01, 29);
  BoundReport rep = make_bound_report(multiband_fixture(), bank.eigenvalues, 2000, 0.01, 29, 0.2, 0.8);
  REQUIRE(rep.covariance);
  std::string text = to_text(rep);
  CHECK(text.find("bias_general ") != std::string::npos);
  CHECK(text.find("covariance ") != std::string::npos);
  CHECK(text.find("bias_smooth inapplicable") == std::string::npos);
  auto j = nlohmann::json::parse(to_json(rep));
  CHECK(j["k"] == 29);
  CHECK(j["bias_general"].get<double>() == rep.bias_general);
  CHECK(j["variance"].get<double>() == rep.variance);
  BoundReport edge = make_bound_report(multiband_fixture(), bank.eigenvalues, 2000, 0.01, 29, 0.22);
  CHECK_FALSE(edge.bias_smooth);
  CHECK(to_text(edge).find("bias_smooth inapplicable") != std::string::npos);
  CHECK(nlohmann::json::parse(to_json(edge))["bias_smooth"].is_null());
}
