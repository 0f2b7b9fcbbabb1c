// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mlstm {

/// Error categories. The CLI maps these onto process exit codes, and
/// checkpoint loading relies on io / version_mismatch / corrupt being
/// distinguishable.
enum class ErrorKind {
  shape,
  invalid_argument,
  io,
  version_mismatch,
  corrupt,
  config,
  numeric,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace mlstm
