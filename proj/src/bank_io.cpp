// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstring>
#include <fstream>

#include "mtm/dpss.hpp"
#include "mtm/error.hpp"

namespace mtm {
namespace {

static_assert(std::endian::native == std::endian::little, "bank files are little-endian");

constexpr char kMagic[4] = {'D', 'P', 'S', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("bank file truncated");
  return v;
}

}  // namespace

void write_bank(const std::filesystem::path& path, const TaperBank& bank) {
  if (bank.first_index != 0) throw ParameterError("only banks starting at taper 0 can be written");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(bank.n));
  put(out, bank.w);
  put(out, static_cast<std::uint64_t>(bank.k_computed()));
  out.write(reinterpret_cast<const char*>(bank.eigenvalues.data()),
            static_cast<std::streamsize>(bank.eigenvalues.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(bank.data.data()),
            static_cast<std::streamsize>(bank.data.size() * sizeof(double)));
  if (!out) throw InputError("write failed for " + path.string());
}

TaperBank read_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw InputError(path.string() + " is not a taper bank");
  if (get<std::uint32_t>(in) != kVersion) throw InputError("unsupported bank version");
  TaperBank bank;
  bank.n = get<std::uint64_t>(in);
  bank.w = get<double>(in);
  std::uint64_t k = get<std::uint64_t>(in);
  if (bank.n == 0 || k > bank.n) throw InputError("corrupt bank header");
  bank.narrow_band = 2.0 * static_cast<double>(bank.n) * bank.w <= 1.0;
  bank.eigenvalues.resize(k);
  bank.data.resize(k * bank.n);
  in.read(reinterpret_cast<char*>(bank.eigenvalues.data()),
          static_cast<std::streamsize>(k * sizeof(double)));
  in.read(reinterpret_cast<char*>(bank.data.data()),
          static_cast<std::streamsize>(bank.data.size() * sizeof(double)));
  if (!in) throw InputError("bank file truncated");
  return bank;
}

}  // namespace mtm
