// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "mtm/error.hpp"
#include "mtm/io.hpp"

namespace mtm {
namespace {

static_assert(std::endian::native == std::endian::little, "binary formats are little-endian");

constexpr char kEstimateMagic[4] = {'M', 'T', 'S', 'E'};
constexpr std::uint32_t kEstimateVersion = 1;

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  std::string t = trim(tok);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw InputError("line " + std::to_string(line) + ": cannot parse number '" + t + "'");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Method method_from_name(const std::string& s) {
  for (Method m : {Method::Periodogram, Method::Single, Method::Multitaper, Method::MultitaperApprox,
                   Method::Adaptive})
    if (method_name(m) == s) return m;
  throw InputError("unknown method tag '" + s + "'");
}

}  // namespace

FileFormat parse_format(const std::string& name) {
  if (name == "csv") return FileFormat::Csv;
  if (name == "json") return FileFormat::Json;
  if (name == "bin") return FileFormat::Bin;
  throw ParameterError("unknown format '" + name + "' (expected csv, json or bin)");
}

FileFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  if (ext == ".bin" || ext == ".raw" || ext == ".f64") return FileFormat::Bin;
  if (ext == ".json") return FileFormat::Json;
  return FileFormat::Csv;
}

std::vector<std::complex<double>> read_samples(const std::filesystem::path& path, FileFormat format) {
  std::vector<std::complex<double>> out;
  if (format == FileFormat::Bin) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw InputError("cannot open " + path.string());
    auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % (2 * sizeof(double)) != 0) throw InputError(path.string() + ": size is not a whole number of complex float64 samples");
    in.seekg(0);
    out.resize(bytes / (2 * sizeof(double)));
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw InputError("read failed for " + path.string());
    return out;
  }
  if (format == FileFormat::Json) throw InputError("samples must be csv or bin");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto comma = t.find(',');
    if (comma == std::string::npos) {
      out.emplace_back(parse_double(t, lineno), 0.0);
    } else {
      out.emplace_back(parse_double(t.substr(0, comma), lineno), parse_double(t.substr(comma + 1), lineno));
    }
  }
  return out;
}

void write_samples(const std::filesystem::path& path, std::span<const std::complex<double>> x,
                   FileFormat format) {
  if (format == FileFormat::Bin) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(x.size() * sizeof(x[0])));
    if (!out) throw InputError("write failed for " + path.string());
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  for (const auto& v : x) out << fmt17(v.real()) << ',' << fmt17(v.imag()) << '\n';
  if (!out) throw InputError("write failed for " + path.string());
}

std::string estimate_meta_json(const SpectralEstimate& est) {
  nlohmann::ordered_json j;
  j["method"] = std::string(method_name(est.method));
  j["l"] = est.grid.l;
  j["n"] = est.meta.n;
  j["w"] = est.meta.w;
  j["k"] = est.meta.k;
  j["epsilon"] = est.meta.epsilon ? nlohmann::ordered_json(*est.meta.epsilon) : nlohmann::ordered_json(nullptr);
  j["fft_count"] = est.meta.fft_count;
  j["fft_length_equivalents"] = est.meta.fft_length_equivalents;
  return j.dump(2);
}

void write_estimate(const std::filesystem::path& path, const SpectralEstimate& est, FileFormat format) {
  const std::size_t l = est.grid.l;
  if (format == FileFormat::Bin) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out.write(kEstimateMagic, 4);
    out.write(reinterpret_cast<const char*>(&kEstimateVersion), sizeof kEstimateVersion);
    std::uint64_t len = l;
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    std::uint32_t m = static_cast<std::uint32_t>(est.method);
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    out.write(reinterpret_cast<const char*>(est.values.data()), static_cast<std::streamsize>(l * sizeof(double)));
    if (!out) throw InputError("write failed for " + path.string());
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  if (format == FileFormat::Json) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(estimate_meta_json(est));
    std::vector<double> f(l);
    for (std::size_t i = 0; i < l; ++i) f[i] = est.grid.frequency(i);
    j["frequency"] = f;
    j["value"] = est.values;
    out << j.dump() << '\n';
  } else {
    out << "frequency,value\n";
    for (std::size_t i = 0; i < l; ++i) out << fmt17(est.grid.frequency(i)) << ',' << fmt17(est.values[i]) << '\n';
  }
  if (!out) throw InputError("write failed for " + path.string());
}

SpectralEstimate read_estimate(const std::filesystem::path& path, FileFormat format) {
  SpectralEstimate est;
  if (format == FileFormat::Bin) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    char magic[4];
    std::uint32_t version = 0, m = 0;
    std::uint64_t len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    in.read(reinterpret_cast<char*>(&m), sizeof m);
    if (!in || std::memcmp(magic, kEstimateMagic, 4) != 0 || version != kEstimateVersion || m > 4)
      throw InputError(path.string() + " is not an estimate file");
    est.grid.l = len;
    est.method = static_cast<Method>(m);
    est.values.resize(len);
    in.read(reinterpret_cast<char*>(est.values.data()), static_cast<std::streamsize>(len * sizeof(double)));
    if (!in) throw InputError("estimate file truncated");
    return est;
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  if (format == FileFormat::Json) {
    nlohmann::json j;
    try {
      in >> j;
      est.method = method_from_name(j.at("method").get<std::string>());
      est.values = j.at("value").get<std::vector<double>>();
      est.grid.l = est.values.size();
      est.meta.n = j.value("n", std::size_t{0});
      est.meta.w = j.value("w", 0.0);
      est.meta.k = j.value("k", std::size_t{0});
      if (j.contains("epsilon") && j["epsilon"].is_number()) est.meta.epsilon = j["epsilon"].get<double>();
      est.meta.fft_count = j.value("fft_count", std::uint64_t{0});
      est.meta.fft_length_equivalents = j.value("fft_length_equivalents", 0.0);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ": " + e.what());
    }
    return est;
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t.rfind("frequency", 0) == 0) continue;
    auto comma = t.find(',');
    if (comma == std::string::npos) throw InputError("line " + std::to_string(lineno) + ": expected frequency,value");
    est.values.push_back(parse_double(t.substr(comma + 1), lineno));
  }
  est.grid.l = est.values.size();
  return est;
}

std::unique_ptr<PsdModel> parse_psd_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("PSD JSON: ") + e.what());
  }
  try {
    if (j.is_object() && j.contains("bumps")) {
      std::vector<LogBump> bumps;
      for (const auto& b : j.at("bumps"))
        bumps.push_back({b.at("center").get<double>(), b.at("width").get<double>(), b.at("height").get<double>()});
      return std::make_unique<SmoothPsd>(log_bump_psd(bumps, j.value("base", 0.0)));
    }
    const nlohmann::json& list = j.is_array() ? j : j.at("pieces");
    double background = j.is_object() ? j.value("background", 0.0) : 0.0;
    std::vector<PsdPiece> pieces;
    for (const auto& p : list)
      pieces.push_back({p.at("start").get<double>(), p.at("end").get<double>(), p.at("level").get<double>()});
    return std::make_unique<PiecewisePsd>(PiecewisePsd::from_pieces(pieces, background));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("PSD JSON: ") + e.what());
  } catch (const ParameterError& e) {
    throw InputError(std::string("PSD JSON: ") + e.what());
  }
}

std::unique_ptr<PsdModel> load_psd(const std::string& spec_or_path) {
  if (spec_or_path == "multiband") return std::make_unique<PiecewisePsd>(multiband_fixture());
  std::string t = trim(spec_or_path);
  if (!t.empty() && (t[0] == '{' || t[0] == '[')) return parse_psd_json(t);
  std::ifstream in(spec_or_path);
  if (!in) throw InputError("cannot open PSD file " + spec_or_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_psd_json(ss.str());
}

}  // namespace mtm
