// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mlstm/checkpoint.hpp"
#include "mlstm/error.hpp"
#include "mlstm/numerics/kernels.hpp"
#include "mlstm/numerics/ops.hpp"

namespace mlstm {

void TrainConfig::validate() const {
  auto check = [](bool ok, const std::string& message) { require(ok, ErrorKind::config, message); };
  check(initial_lr > 0.0 && std::isfinite(initial_lr), "initial_lr must be > 0");
  check(lr_decay > 0.0 && lr_decay < 1.0, "lr_decay must lie in (0, 1)");
  check(min_reduction >= 0.0, "min_reduction must be >= 0");
  check(min_lr > 0.0, "min_lr must be > 0");
  check(clip_norm > 0.0, "clip_norm must be > 0");
  check(batch_size >= 1, "batch_size must be >= 1");
  check(unroll >= 1, "unroll must be >= 1");
}

AnnealState anneal_learning_rate(const AnnealState& state, double current_perplexity,
                                 const TrainConfig& cfg) {
  require(std::isfinite(current_perplexity), ErrorKind::numeric, "anneal: non-finite perplexity");
  AnnealState next = state;
  if (current_perplexity > state.previous_perplexity - cfg.min_reduction) {
    if (state.given_chances < cfg.epochs_to_wait) {
      ++next.given_chances;
    } else {
      next.learning_rate = std::max(cfg.min_lr, state.learning_rate * cfg.lr_decay);
      next.given_chances = 0;
    }
  } else {
    next.given_chances = 0;
  }
  next.previous_perplexity = current_perplexity;
  return next;
}

double global_norm(const ModelParams& grads) {
  double sum = 0.0;
  for_each_tensor(grads, [&](const std::string&, std::span<const double> g) { sum += squared_norm(g); });
  return std::sqrt(sum);
}

double clip_gradients(ModelParams& grads, double clip_norm) {
  require(clip_norm > 0.0, ErrorKind::invalid_argument, "clip_gradients: clip_norm must be > 0");
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const double factor = clip_norm / norm;
    for_each_tensor(grads, [&](const std::string&, std::span<double> g) { kernels::scale(factor, g); });
  }
  return norm;
}

void sgd_update(ModelParams& params, const ModelParams& grads, double learning_rate) {
  std::vector<std::span<const double>> grad_tensors;
  for_each_tensor(grads, [&](const std::string&, std::span<const double> g) { grad_tensors.push_back(g); });
  std::size_t k = 0;
  for_each_tensor(params, [&](const std::string& name, std::span<double> p) {
    require(k < grad_tensors.size() && grad_tensors[k].size() == p.size(), ErrorKind::shape,
            "sgd_update: gradient shape mismatch at " + name);
    kernels::axpy(-learning_rate, grad_tensors[k++], p);
  });
  require(k == grad_tensors.size(), ErrorKind::shape, "sgd_update: tensor count mismatch");
}

EpochResult run_epoch(ModelParams& params, ModelState& state, const BatchedCorpus& corpus,
                      const ModelConfig& config, const TrainConfig& cfg, EpochMode mode,
                      SeededRng& rng, double learning_rate) {
  require(!corpus.ids.empty(), ErrorKind::invalid_argument, "run_epoch: empty corpus");
  require(corpus.vocab_size == config.vocab_size, ErrorKind::invalid_argument,
          "run_epoch: corpus vocabulary does not match the model");
  const bool train = mode == EpochMode::train;
  EpochResult result;
  for (const Window& w : windows(corpus, cfg.unroll)) {
    WindowOutput out = forward_window(params, config, state, w.inputs, train, rng);
    const double window_nll = nll_sum(out.cache.probs, w.targets);
    require(std::isfinite(window_nll), ErrorKind::numeric,
            "non-finite loss in window starting at step " + std::to_string(w.start));
    result.nll_sum += window_nll;
    result.token_count += w.targets.steps * w.targets.batch;
    if (train) {
      ModelParams grads = backward_window(params, config, out.cache, w.targets);
      clip_gradients(grads, cfg.clip_norm);
      sgd_update(params, grads, learning_rate);
    }
    state = carry_state(out.state);
  }
  result.perplexity = perplexity_from_nll(result.nll_sum, result.token_count);
  return result;
}

std::string format_epoch_row(const EpochRow& row) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, "%zu,%.10g,%.6f,%.6f,%zu", row.epoch, row.learning_rate,
                row.train_perplexity, row.valid_perplexity, row.given_chances);
  return buffer;
}

FitResult fit(const ModelConfig& config, const TrainConfig& cfg, const Vocabulary& vocab,
              std::span<const TokenId> train, std::span<const TokenId> valid,
              std::span<const TokenId> test, const FitOptions& options) {
  config.validate();
  cfg.validate();
  require(config.vocab_size == vocab.size(), ErrorKind::config,
          "fit: model vocab_size does not match the vocabulary");

  const BatchedCorpus train_corpus = batchify(train, cfg.batch_size, vocab.size());
  const BatchedCorpus valid_corpus = batchify(valid, cfg.batch_size, vocab.size());

  SeededRng init_rng(config.seed);
  ModelParams params = init_params(config, init_rng);
  SeededRng train_rng(derive_seed(cfg.seed, kTrainStream));

  auto validate = [&](std::size_t epoch) {
    const double ppl = options.validation ? options.validation(params, epoch)
                                          : evaluate(params, config, valid_corpus, cfg.unroll).perplexity;
    require(std::isfinite(ppl), ErrorKind::numeric,
            "non-finite validation perplexity at epoch " + std::to_string(epoch));
    return ppl;
  };
  auto log_row = [&](const EpochRow& row) {
    for (std::ostream* log : options.logs) *log << format_epoch_row(row) << '\n' << std::flush;
  };
  auto save_best = [&](std::size_t epoch, double valid_ppl) {
    if (options.checkpoint_path.empty()) return;
    save_checkpoint(Checkpoint{config, cfg, vocab, params, CheckpointMeta{epoch, valid_ppl}},
                    options.checkpoint_path);
  };

  for (std::ostream* log : options.logs) *log << kEpochLogHeader << '\n';

  FitResult result;
  TrainingReport& report = result.report;
  AnnealState anneal = AnnealState::initial(cfg);

  EpochRow initial;
  initial.epoch = 0;
  initial.learning_rate = anneal.learning_rate;
  initial.train_perplexity = evaluate(params, config, train_corpus, cfg.unroll).perplexity;
  initial.valid_perplexity = validate(0);
  report.rows.push_back(initial);
  report.best_epoch = 0;
  report.best_valid_perplexity = initial.valid_perplexity;
  result.best_params = params;
  save_best(0, initial.valid_perplexity);
  log_row(initial);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    ModelState state = init_state(config, cfg.batch_size, train_rng);
    const double lr = anneal.learning_rate;
    const EpochResult trained =
        run_epoch(params, state, train_corpus, config, cfg, EpochMode::train, train_rng, lr);
    const double valid_ppl = validate(epoch);
    anneal = anneal_learning_rate(anneal, valid_ppl, cfg);

    EpochRow row{epoch, lr, trained.perplexity, valid_ppl, anneal.given_chances};
    report.rows.push_back(row);
    if (valid_ppl < report.best_valid_perplexity) {
      report.best_epoch = epoch;
      report.best_valid_perplexity = valid_ppl;
      result.best_params = params;
      save_best(epoch, valid_ppl);
    }
    log_row(row);
  }

  if (!test.empty()) {
    const BatchedCorpus test_corpus = batchify(test, cfg.batch_size, vocab.size());
    report.test = evaluate(result.best_params, config, test_corpus, cfg.unroll);
  }
  return result;
}

}  // namespace mlstm
