// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "mlstm/data.hpp"
#include "mlstm/language_model.hpp"

namespace mlstm {

struct EvalReport {
  std::size_t token_count = 0;
  double mean_nll = 0.0;
  double perplexity = 1.0;
};

/// "tokens=<n> nll=<x> ppl=<y>"
std::string format_report(const EvalReport& report);

/// exp(sum_nll / token_count). Equal to 2 to the power of the mean base-2
/// cross-entropy.
double perplexity_from_nll(double sum_nll, std::size_t token_count);

/// Eval-mode stateful pass over every window of `corpus`, starting from
/// evaluation_state(config). Every target token counts, including those in
/// a final partial window.
EvalReport evaluate(const ModelParams& params, const ModelConfig& config, const BatchedCorpus& corpus,
                    std::size_t unroll);

}  // namespace mlstm
