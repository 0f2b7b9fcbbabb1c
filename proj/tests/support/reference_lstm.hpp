// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Plain single-cell LSTM language model written with explicit loops, used
// as an independent oracle. It shares no arithmetic with the library: only
// ModelParams is reused, as storage.

#include <cstddef>
#include <vector>

#include "mlstm/data.hpp"
#include "mlstm/language_model.hpp"

namespace mlstm::testing {

struct ReferenceLayerState {
  std::vector<std::vector<double>> h;  // [batch][nodes]
  std::vector<std::vector<double>> c;  // [batch][nodes]
};

struct ReferenceResult {
  double loss = 0.0;                                  // mean NLL
  std::vector<std::vector<std::vector<double>>> h;    // [step][layer] -> flattened [batch * nodes]
  std::vector<std::vector<std::vector<double>>> probs;  // [step][batch][vocab]
  std::vector<ReferenceLayerState> final_state;
  ModelParams grads;
};

/// Forward and BPTT of the standard LSTM stack (no dropout) over one window.
/// `initial` holds one state per layer.
ReferenceResult reference_window(const ModelParams& params, const std::vector<ReferenceLayerState>& initial,
                                 const TokenGrid& inputs, const TokenGrid& targets);

/// Reference state with h = 0 and c taken from cell 0 of each node of `state`.
std::vector<ReferenceLayerState> reference_state_from(const ModelState& state);

}  // namespace mlstm::testing
