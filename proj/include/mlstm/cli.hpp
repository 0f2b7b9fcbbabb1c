// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace mlstm {

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumeric = 4,
  kExitGradcheck = 5,
};

/// Entry point for the `mlstm` tool: train, evaluate, gradcheck, generate.
/// Failures print one line to `err`:
///   error: kind=<kind> exit=<code> message=<text>
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlstm
