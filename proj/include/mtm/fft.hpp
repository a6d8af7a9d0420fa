// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

namespace mtm::fft {

using cplx = std::complex<double>;

// In-place complex transforms. forward uses exp(-j2pi kn/L), backward uses
// exp(+j2pi kn/L); neither is normalized.
void forward(std::span<cplx> data);
void backward(std::span<cplx> data);

// Real-input forward transform: out has in.size()/2 + 1 entries.
void forward_real(std::span<const double> in, std::span<cplx> out);

// Hermitian-input inverse: in has out.size()/2 + 1 entries, result unnormalized.
void backward_real(std::span<const cplx> in, std::span<double> out);

// Every executed transform is tallied on the calling thread.
struct Tally {
  std::uint64_t transforms = 0;
  std::uint64_t points = 0;  // sum of transform lengths
};

Tally thread_tally();

class ScopedTally {
 public:
  ScopedTally() : start_(thread_tally()) {}
  Tally elapsed() const {
    Tally now = thread_tally();
    return {now.transforms - start_.transforms, now.points - start_.points};
  }

 private:
  Tally start_;
};

// Merges a tally measured on a worker thread into the calling thread's counter,
// so parallel sections still report their transforms to the caller.
void credit(const Tally& t);

}  // namespace mtm::fft
