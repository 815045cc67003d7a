// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace chembridge {

// Error taxonomy shared by the library and the CLI. Exit codes:
// 0 ok, 2 schema, 3 data, 4 numeric, 5 I/O.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual int exit_code() const { return 1; }
};

// Malformed file structure: missing columns, bad magic, bad header.
class SchemaError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// Well-formed file, bad content: unparseable SMILES, id mismatches,
// degenerate datasets.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

// Non-finite intermediates, zero-norm rows, failed numeric contracts.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 5; }
};

}  // namespace chembridge
