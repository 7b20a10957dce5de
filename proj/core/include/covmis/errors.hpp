// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covmis {

/// Malformed or inconsistent input data (files, records, label sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A record-oriented file failed to parse at a specific line (1-based).
class ParseError : public DataError {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace covmis
