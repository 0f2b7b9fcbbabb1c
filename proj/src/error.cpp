// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/error.hpp"

namespace mlstm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::shape:
      return "shape";
    case ErrorKind::invalid_argument:
      return "invalid_argument";
    case ErrorKind::io:
      return "io";
    case ErrorKind::version_mismatch:
      return "version_mismatch";
    case ErrorKind::corrupt:
      return "corrupt";
    case ErrorKind::config:
      return "config";
    case ErrorKind::numeric:
      return "numeric";
  }
  return "unknown";
}

}  // namespace mlstm
