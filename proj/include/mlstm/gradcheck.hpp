// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Central finite-difference check of backward_window against forward-only
// loss evaluations, on a deliberately tiny model so every parameter can be
// probed.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlstm/language_model.hpp"
#include "mlstm/selection.hpp"

namespace mlstm {

struct GradcheckOptions {
  std::size_t vocab_size = 20;
  std::size_t embed_dim = 8;
  std::size_t hidden_dim = 8;
  std::size_t num_layers = 2;
  std::size_t cells = 3;
  std::size_t unroll = 5;
  std::size_t batch = 2;
  double init_scale = 0.3;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::uint64_t seed = 1234;
  /// Draws whose closest selection decision is nearer a tie than this are
  /// rejected and redrawn (up to max_attempts draws).
  double min_selection_margin = 1e-4;
  std::size_t max_attempts = 512;
};

/// The model configuration gradcheck builds for `kind`: dropout off, jitter
/// cell initialization.
ModelConfig gradcheck_model_config(SelectionKind kind, const GradcheckOptions& options);

struct GradcheckGroup {
  std::string name;  // tensor name, e.g. "layer1.U_f"
  std::size_t checked = 0;
  double max_relative_error = 0.0;
};

struct GradcheckResult {
  SelectionKind kind = SelectionKind::max_pooling;
  std::vector<GradcheckGroup> groups;
  double max_relative_error = 0.0;
  /// Closest approach to a tie over all winner-take-all decisions (score gap
  /// to the runner-up, and |o - o_thr| for min_max_pooling); +inf for
  /// averaging strategies.
  double selection_margin = 0.0;
  std::size_t attempts = 0;  // draws used, including rejected ones
  bool passed = false;
};

/// |a - n| / max(|a|, |n|, 1e-5); the floor keeps near-zero entries from
/// amplifying rounding noise.
double gradcheck_relative_error(double analytic, double numeric);

/// Checks every parameter entry. random_selection replays the same seeded
/// generator for every evaluation, so all probes see identical indices.
/// Draw k > 0 uses derive_seed(seed, k).
GradcheckResult run_gradcheck(SelectionKind kind, const GradcheckOptions& options = {});

/// All six strategies in declaration order.
std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options = {});

/// One line per group plus a summary line per strategy.
void print_gradcheck(std::ostream& out, const GradcheckResult& result, double tolerance);

}  // namespace mlstm
