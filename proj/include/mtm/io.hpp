// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtm/estimators.hpp"
#include "mtm/psd.hpp"

namespace mtm {

enum class FileFormat { Csv, Json, Bin };

FileFormat parse_format(const std::string& name);
// csv / json / bin by extension; anything else is csv
FileFormat format_from_extension(const std::filesystem::path& path);

// Samples: CSV with one "re,im" pair per line (a lone value is a real sample;
// blank lines and lines starting with '#' are skipped), or raw interleaved
// little-endian float64 pairs.
std::vector<std::complex<double>> read_samples(const std::filesystem::path& path, FileFormat format);
void write_samples(const std::filesystem::path& path, std::span<const std::complex<double>> x,
                   FileFormat format);

// Estimates: CSV "frequency,value" with 17 significant digits, JSON with
// metadata, or binary (magic "MTSE", u32 version, u64 l, u32 method, then
// l float64 values).
void write_estimate(const std::filesystem::path& path, const SpectralEstimate& est, FileFormat format);
SpectralEstimate read_estimate(const std::filesystem::path& path, FileFormat format);

std::string estimate_meta_json(const SpectralEstimate& est);

// PSD descriptions: {"pieces": [{"start", "end", "level"}...], "background": b}
// or a bare piece list; {"bumps": [{"center", "width", "height"}...], "base": b}
// for a smooth spectrum. "multiband" names the built-in four-source fixture.
std::unique_ptr<PsdModel> load_psd(const std::string& spec_or_path);
std::unique_ptr<PsdModel> parse_psd_json(const std::string& text);

}  // namespace mtm
