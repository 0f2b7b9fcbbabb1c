// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "mlstm/error.hpp"

namespace mlstm {

std::string format_report(const EvalReport& report) {
  char buffer[128];
  std::snprintf(buffer, sizeof buffer, "tokens=%zu nll=%.10f ppl=%.10f", report.token_count,
                report.mean_nll, report.perplexity);
  return buffer;
}

double perplexity_from_nll(double sum_nll, std::size_t token_count) {
  require(token_count > 0, ErrorKind::invalid_argument, "perplexity: no tokens");
  return std::exp(sum_nll / static_cast<double>(token_count));
}

EvalReport evaluate(const ModelParams& params, const ModelConfig& config, const BatchedCorpus& corpus,
                    std::size_t unroll) {
  require(corpus.vocab_size == config.vocab_size, ErrorKind::invalid_argument,
          "evaluate: corpus vocabulary does not match the model");
  ModelState state = evaluation_state(config, corpus.batch_size);
  SeededRng rng(derive_seed(config.seed, kEvalStream));
  double total = 0.0;
  std::size_t count = 0;
  for (const Window& w : windows(corpus, unroll)) {
    WindowOutput out = forward_window(params, config, state, w.inputs, false, rng);
    total += nll_sum(out.cache.probs, w.targets);
    count += w.targets.steps * w.targets.batch;
    state = carry_state(out.state);
  }
  require(std::isfinite(total), ErrorKind::numeric, "evaluate: non-finite loss");
  EvalReport report;
  report.token_count = count;
  report.mean_nll = total / static_cast<double>(count);
  report.perplexity = perplexity_from_nll(total, count);
  return report;
}

}  // namespace mlstm
