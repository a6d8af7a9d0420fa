// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string>

#include "mtm/simd.hpp"

namespace mtm::simd {
namespace detail {
#if !defined(MTM_HAVE_AVX2)
const Kernels* avx2_kernels() { return nullptr; }
#endif
#if !defined(MTM_HAVE_NEON)
const Kernels* neon_kernels() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(MTM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels& select() {
  // SPECTRUM_SIMD=scalar|avx2|neon pins a variant (unsupported names fall back).
  if (const char* env = std::getenv("SPECTRUM_SIMD")) {
    std::string want(env);
    if (want == "scalar") return detail::scalar_kernels();
    if (want == "avx2" && kernels_for(Isa::Avx2)) return *kernels_for(Isa::Avx2);
    if (want == "neon" && kernels_for(Isa::Neon)) return *kernels_for(Isa::Neon);
  }
  if (const Kernels* k = kernels_for(Isa::Avx2)) return *k;
  if (const Kernels* k = kernels_for(Isa::Neon)) return *k;
  return detail::scalar_kernels();
}

}  // namespace

const Kernels* kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &detail::scalar_kernels();
    case Isa::Avx2:
      return cpu_has_avx2() ? detail::avx2_kernels() : nullptr;
    case Isa::Neon:
      // NEON is mandatory on AArch64
      return detail::neon_kernels();
  }
  return nullptr;
}

const Kernels& kernels() {
  static const Kernels& active = select();
  return active;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
    if (kernels_for(isa)) out.push_back(isa);
  return out;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace mtm::simd
