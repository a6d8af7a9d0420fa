#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "mtm/dpss.hpp"
#include "mtm/error.hpp"
#include "mtm/parallel.hpp"
#include "oracles.hpp"

using namespace mtm;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("prolate kernel matches the dense Toeplitz product") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uw(0.001, 0.499);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng() % 256;
    double w = uw(rng);
    ProlateKernel kern(n, w);
    auto dense = oracle::prolate_matrix(n, w);
    std::vector<double> v(n);
    std::vector<cplx> z(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = g(rng);
      z[i] = {g(rng), g(rng)};
    }
    auto bv = apply_prolate(kern, std::span<const double>(v));
    auto bz = apply_prolate(kern, std::span<const cplx>(z));
    double scale = 0.0, err = 0.0, zerr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ref = 0.0;
      cplx zref = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        ref += dense[i * n + j] * v[j];
        zref += dense[i * n + j] * z[j];
      }
      scale = std::max(scale, std::abs(ref));
      err = std::max(err, std::abs(ref - bv[i]));
      zerr = std::max(zerr, std::abs(zref - bz[i]) / std::max(std::abs(zref), 1e-300));
      CHECK(kern.entry(i, 0) == doctest::Approx(dense[i * n]).epsilon(1e-14));
    }
    CHECK(err <= 1e-12 * scale);
    double qf = kern.quadratic_form(v);
    CHECK(qf == doctest::Approx(dot(v, bv)).epsilon(1e-12));
  }
}

TEST_CASE("tapers and eigenvalues agree with a dense eigendecomposition") {
  struct Case {
    std::size_t n;
    double w;
  };
  for (Case c : {Case{16, 0.1}, Case{33, 0.2}, Case{64, 0.05}, Case{128, 0.125}, Case{200, 0.01},
                 Case{256, 0.3}}) {
    CAPTURE(c.n);
    CAPTURE(c.w);
    auto eig = oracle::symmetric_eigen(oracle::prolate_matrix(c.n, c.w), c.n);
    std::size_t k_max = std::min<std::size_t>(c.n, floor_2nw(c.n, c.w) + 12);
    TaperBank bank = build_taper_bank(c.n, c.w, k_max);
    REQUIRE(bank.k_computed() == k_max);
    for (std::size_t k = 0; k < k_max; ++k) {
      CAPTURE(k);
      double ref = std::clamp(eig.values[k], 2.220446049250313e-16, 1.0);
      CHECK(std::abs(bank.eigenvalues[k] - ref) <= 1e-12);
      // eigenvectors are only determined up to sign
      std::span<const double> ref_vec(eig.vectors.data() + k * c.n, c.n);
      double overlap = std::abs(dot(bank.taper(k), ref_vec));
      double gap = k + 1 < c.n ? eig.values[k] - eig.values[k + 1] : 1.0;
      if (k > 0) gap = std::min(gap, eig.values[k - 1] - eig.values[k]);
      if (eig.values[k] > 1e-8 && gap > 1e-6)
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("bank invariants: orthonormal, descending, parity, sign, Rayleigh") {
  for (auto [n, w] : {std::pair<std::size_t, double>{513, 0.02}, {1000, 0.01}, {2000, 0.01}}) {
    CAPTURE(n);
    std::size_t k_max = floor_2nw(n, w) + 10;
    TaperBank bank = build_taper_bank(n, w, k_max);
    ProlateKernel kern(n, w);
    for (std::size_t a = 0; a < k_max; ++a) {
      auto va = bank.taper(a);
      CHECK(bank.eigenvalues[a] > 0.0);
      CHECK(bank.eigenvalues[a] < 1.0);
      // near 1 the Rayleigh quotients agree to rounding only
      if (a > 0) CHECK(bank.eigenvalues[a] <= bank.eigenvalues[a - 1] + 1e-14);
      CHECK(std::abs(kern.quadratic_form(va) - bank.eigenvalues[a]) <= 1e-8);
      double sym = a % 2 == 0 ? 1.0 : -1.0, worst = 0.0, sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(va[i] - sym * va[n - 1 - i]));
        sum += va[i];
      }
      CHECK(worst <= 1e-9);
      if (a % 2 == 0) CHECK(sum > 0.0);
      for (std::size_t b = a; b < std::min(k_max, a + 6); ++b)
        CHECK(std::abs(dot(va, bank.taper(b)) - (a == b ? 1.0 : 0.0)) <= 1e-10);
    }
  }
}

TEST_CASE("odd tapers take their sign from the first significant entry") {
  TaperBank bank = build_taper_bank(301, 0.03, 12);
  for (std::size_t k = 1; k < 12; k += 2) {
    auto v = bank.taper(k);
    double mx = 0.0;
    for (double e : v) mx = std::max(mx, std::abs(e));
    for (double e : v)
      if (std::abs(e) >= 1e-10 * mx) {
        CHECK(e > 0.0);
        break;
      }
  }
}

TEST_CASE("bank is identical for any worker count") {
  setenv("SPECTRUM_THREADS", "1", 1);
  TaperBank a = build_taper_bank(1500, 0.02, 70);
  setenv("SPECTRUM_THREADS", "4", 1);
  TaperBank b = build_taper_bank(1500, 0.02, 70);
  unsetenv("SPECTRUM_THREADS");
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.data == b.data);
}

TEST_CASE("range banks equal slices of the full bank") {
  DpssSolver solver(700, 0.02);
  TaperBank full = build_taper_bank(solver, 0, 40);
  TaperBank part = build_taper_bank(solver, 25, 10);
  CHECK(part.first_index == 25);
  for (std::size_t k = 25; k < 35; ++k) {
    CHECK(part.holds(k));
    CHECK(part.eigenvalue_at(k) == full.eigenvalues[k]);
    CHECK(oracle::max_abs_diff(part.taper_at(k), full.taper(k)) == 0.0);
  }
  CHECK_FALSE(part.holds(35));
  CHECK(solver.eigenvalue(30) == full.eigenvalues[30]);
}

TEST_CASE("eigenvalue count in the transition band respects the width bound") {
  for (auto [n, w] : {std::pair<std::size_t, double>{300, 0.05}, {1000, 0.01}, {2000, 0.01}}) {
    TaperBank bank = build_taper_bank(n, w, std::min<std::size_t>(n, floor_2nw(n, w) + 60));
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      std::size_t count = 0;
      for (double l : bank.eigenvalues) count += (l > eps && l < 1.0 - eps) ? 1 : 0;
      CHECK(static_cast<double>(count) <= transition_width_bound(n, w, eps));
    }
  }
}

TEST_CASE("eigenvalue lower bound holds where it is positive") {
  for (auto [n, w] : {std::pair<std::size_t, double>{500, 0.04}, {2000, 0.01}}) {
    std::size_t top = floor_2nw(n, w);
    TaperBank bank = build_taper_bank(n, w, top);
    for (std::size_t k = 0; k + 1 <= top; ++k) {
      double lb = eigenvalue_lower_bound(n, w, k);
      if (lb > 0.0) CHECK(bank.eigenvalues[k] >= lb);
    }
  }
}

TEST_CASE("taper count selection") {
  CHECK(select_num_tapers(2000, 0.01, 1e-3) == 36);
  CHECK(select_num_tapers(2000, 0.01, 1e-6) == 32);
  CHECK(select_num_tapers(2000, 0.01, 1e-9) == 29);
  // definition check against the computed eigenvalues
  TaperBank bank = build_taper_bank(2000, 0.01, 40);
  for (double delta : {1e-3, 1e-6, 1e-9}) {
    std::size_t k = select_num_tapers(2000, 0.01, delta);
    CHECK(bank.eigenvalues[k - 1] >= 1.0 - delta);
    CHECK(bank.eigenvalues[k] < 1.0 - delta);
  }
  CHECK(select_num_tapers(64, 0.01, 1e-12) == 0);
}

TEST_CASE("floor of 2nw is robust to rounding") {
  CHECK(floor_2nw(2000, 0.01) == 40);
  CHECK(floor_2nw(10000, 0.01) == 200);
  CHECK(floor_2nw(1000, 0.0035) == 7);
  CHECK(floor_2nw(100, 0.0049) == 0);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate_bandwidth(0.0), ParameterError);
  CHECK_THROWS_AS(validate_bandwidth(0.5), ParameterError);
  CHECK_THROWS_AS(validate_bandwidth(-0.1), ParameterError);
  CHECK_THROWS_AS(build_taper_bank(100, 0.1, 101), ParameterError);
  CHECK_THROWS_AS(build_taper_bank(0, 0.1, 1), ParameterError);
  CHECK_NOTHROW(validate_bandwidth(0.25));
}

TEST_CASE("narrow band inputs are flagged but computed") {
  TaperBank bank = build_taper_bank(40, 0.01, 3);
  CHECK(bank.narrow_band);
  CHECK(bank.k_computed() == 3);
  CHECK_FALSE(build_taper_bank(400, 0.01, 3).narrow_band);
}

TEST_CASE("eigenvalue clamp keeps the open interval") {
  CHECK(clamp_eigenvalue(0.0) > 0.0);
  CHECK(clamp_eigenvalue(1.0) < 1.0);
  CHECK(clamp_eigenvalue(0.5) == 0.5);
}

TEST_CASE("bank files round trip exactly") {
  TaperBank bank = build_taper_bank(257, 0.05, 20);
  auto path = std::filesystem::temp_directory_path() / "mtm_bank_roundtrip.bin";
  write_bank(path, bank);
  TaperBank back = read_bank(path);
  CHECK(back.n == bank.n);
  CHECK(back.w == bank.w);
  CHECK(back.eigenvalues == bank.eigenvalues);
  CHECK(back.data == bank.data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_bank(path), InputError);
}
