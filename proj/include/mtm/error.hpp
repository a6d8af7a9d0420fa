// Copyright 2026 The multitaper authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mtm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values: bandwidth out of range, size mismatches, and so on.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The inputs are individually valid but the combination violates a standing
// assumption (for instance the eigenvalue conditions of the fast estimator).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// A bound was requested where its hypotheses do not hold.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : Error(what), index_(index) {}

  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

}  // namespace mtm
