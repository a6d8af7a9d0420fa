// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include "mtm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "mtm/error.hpp"

namespace mtm::fft {
namespace {

enum class Kind { Forward, Backward, RealForward, RealBackward };

thread_local Tally tls_tally;

struct PlanCache {
  std::mutex mu;
  std::map<std::pair<Kind, std::size_t>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

// The planner is not thread safe; execution with the new-array interface is.
fftw_plan plan_for(Kind kind, std::size_t n) {
  PlanCache& c = cache();
  std::lock_guard<std::mutex> lock(c.mu);
  auto it = c.plans.find({kind, n});
  if (it != c.plans.end()) return it->second;

  const int len = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = nullptr;
  switch (kind) {
    case Kind::Forward:
    case Kind::Backward: {
      std::vector<cplx> buf(n);
      auto* ptr = reinterpret_cast<fftw_complex*>(buf.data());
      p = fftw_plan_dft_1d(len, ptr, ptr, kind == Kind::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           flags);
      break;
    }
    case Kind::RealForward: {
      std::vector<double> in(n);
      std::vector<cplx> out(n / 2 + 1);
      p = fftw_plan_dft_r2c_1d(len, in.data(), reinterpret_cast<fftw_complex*>(out.data()), flags);
      break;
    }
    case Kind::RealBackward: {
      std::vector<cplx> in(n / 2 + 1);
      std::vector<double> out(n);
      p = fftw_plan_dft_c2r_1d(len, reinterpret_cast<fftw_complex*>(in.data()), out.data(), flags);
      break;
    }
  }
  if (p == nullptr) throw NumericalError("FFTW could not create a plan of length " + std::to_string(n));
  c.plans.emplace(std::make_pair(kind, n), p);
  return p;
}

void count(std::size_t n) {
  tls_tally.transforms += 1;
  tls_tally.points += n;
}

}  // namespace

void forward(std::span<cplx> data) {
  if (data.empty()) return;
  fftw_plan p = plan_for(Kind::Forward, data.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
  count(data.size());
}

void backward(std::span<cplx> data) {
  if (data.empty()) return;
  fftw_plan p = plan_for(Kind::Backward, data.size());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
  count(data.size());
}

void forward_real(std::span<const double> in, std::span<cplx> out) {
  const std::size_t n = in.size();
  if (n == 0) return;
  if (out.size() != n / 2 + 1) throw ParameterError("forward_real: output must have n/2+1 entries");
  fftw_plan p = plan_for(Kind::RealForward, n);
  // r2c plans never write to their input
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  count(n);
}

void backward_real(std::span<const cplx> in, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) return;
  if (in.size() != n / 2 + 1) throw ParameterError("backward_real: input must have n/2+1 entries");
  fftw_plan p = plan_for(Kind::RealBackward, n);
  // c2r destroys its input
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  count(n);
}

Tally thread_tally() { return tls_tally; }

void credit(const Tally& t) {
  tls_tally.transforms += t.transforms;
  tls_tally.points += t.points;
}

}  // namespace mtm::fft
