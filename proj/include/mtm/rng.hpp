// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace mtm {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Stream of variates addressed by position. The seed is the Philox key; the
// counter is (position lo, position hi, stream lo, stream hi). A stream is a
// draw index in the process sampler, so any draw can be regenerated alone.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::array<std::uint32_t, 4> block(std::uint64_t position) const;

  // Two uniforms in (0, 1) with 53-bit resolution from one block.
  std::array<double, 2> uniforms(std::uint64_t position) const;

  // Circularly symmetric complex normal with E|z|^2 = 1 (Box-Muller on one block).
  std::complex<double> complex_normal(std::uint64_t position) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace mtm
