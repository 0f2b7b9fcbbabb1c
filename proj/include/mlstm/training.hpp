// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Plain SGD with global-norm clipping, validation-driven learning-rate
// annealing, and the epoch loop.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlstm/data.hpp"
#include "mlstm/evaluation.hpp"
#include "mlstm/language_model.hpp"

namespace mlstm {

struct TrainConfig {
  double initial_lr = 1.0;
  double lr_decay = 0.5;
  std::size_t epochs_to_wait = 2;
  double min_reduction = 2.0;
  double min_lr = 1e-4;
  double clip_norm = 5.0;
  std::size_t batch_size = 20;
  std::size_t unroll = 35;
  std::size_t max_epochs = 39;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Annealing state carried between epochs.
struct AnnealState {
  double learning_rate = 1.0;
  std::size_t given_chances = 0;
  double previous_perplexity = std::numeric_limits<double>::infinity();

  static AnnealState initial(const TrainConfig& cfg) { return AnnealState{cfg.initial_lr, 0, std::numeric_limits<double>::infinity()}; }
};

/// One annealing decision after an epoch's validation perplexity.
///
/// No sufficient improvement (current > previous - min_reduction): spend a
/// chance, or once epochs_to_wait chances are spent decay the rate
/// (floored at min_lr) and reset the chances. Sufficient improvement resets
/// the chances. The current perplexity becomes the new reference either way.
AnnealState anneal_learning_rate(const AnnealState& state, double current_perplexity,
                                 const TrainConfig& cfg);

double global_norm(const ModelParams& grads);

/// Rescales all gradients by clip_norm / norm when the global L2 norm
/// exceeds clip_norm. Returns the norm before clipping.
double clip_gradients(ModelParams& grads, double clip_norm);

/// params -= learning_rate * grads
void sgd_update(ModelParams& params, const ModelParams& grads, double learning_rate);

enum class EpochMode { train, eval };

struct EpochResult {
  double perplexity = 0.0;
  double nll_sum = 0.0;
  std::size_t token_count = 0;
};

/// One pass over every window of `corpus` in order with stateful carry,
/// starting from `state` (updated in place). Train mode does
/// forward/backward/clip/update per window at `learning_rate`.
EpochResult run_epoch(ModelParams& params, ModelState& state, const BatchedCorpus& corpus,
                      const ModelConfig& config, const TrainConfig& cfg, EpochMode mode,
                      SeededRng& rng, double learning_rate);

struct EpochRow {
  std::size_t epoch = 0;
  double learning_rate = 0.0;
  double train_perplexity = 0.0;
  double valid_perplexity = 0.0;
  std::size_t given_chances = 0;
};

inline constexpr const char* kEpochLogHeader = "epoch,lr,train_ppl,valid_ppl,given_chances";
std::string format_epoch_row(const EpochRow& row);

struct TrainingReport {
  std::vector<EpochRow> rows;  // rows[0] is the untrained model
  std::size_t best_epoch = 0;
  double best_valid_perplexity = std::numeric_limits<double>::infinity();
  std::optional<EvalReport> test;
};

/// Overrides validation; receives the current parameters and epoch number.
using ValidationFn = std::function<double(const ModelParams&, std::size_t epoch)>;

struct FitOptions {
  /// Best-validation checkpoint destination; empty disables saving.
  std::filesystem::path checkpoint_path;
  /// Streams receiving the epoch log (header + one row per epoch).
  std::vector<std::ostream*> logs;
  ValidationFn validation;
};

struct FitResult {
  TrainingReport report;
  ModelParams best_params;
};

/// Full protocol: evaluate the untrained model (epoch 0), then per epoch
/// reset states, train, validate, anneal and keep the best-validation
/// parameters; finally report the best parameters' test perplexity when a
/// test corpus is given.
FitResult fit(const ModelConfig& config, const TrainConfig& cfg, const Vocabulary& vocab,
              std::span<const TokenId> train, std::span<const TokenId> valid,
              std::span<const TokenId> test, const FitOptions& options = {});

}  // namespace mlstm
