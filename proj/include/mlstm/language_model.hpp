// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Word-level language model: embedding -> stacked multi-cell LSTM layers ->
// fully connected softmax. Dropout masks sit on every non-recurrent
// connection (embedding output, between layers, before the projection);
// recurrent h and cell paths are never dropped.

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mlstm/data.hpp"
#include "mlstm/multicell_layer.hpp"
#include "mlstm/numerics/matrix.hpp"
#include "mlstm/numerics/rng.hpp"
#include "mlstm/selection.hpp"

namespace mlstm {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 200;
  std::size_t hidden_dim = 200;
  std::size_t num_layers = 2;
  std::size_t cells = 10;
  SelectionKind strategy = SelectionKind::max_pooling;
  double output_threshold = 0.5;
  double dropout_rate = 0.0;
  double init_scale = 0.1;
  CellInit cell_init = CellInit::jitter;
  double jitter_scale = kDefaultJitterScale;
  std::uint64_t seed = 0;

  /// Throws Error(config) describing the first violated constraint.
  void validate() const;
  SelectionStrategy selection() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  RealMatrix embedding;  // [vocab x embed_dim]
  std::vector<LayerParams> layers;
  RealMatrix out_proj;   // [vocab x hidden_dim]
  RealVector out_bias;   // [vocab]

  /// Zero tensors with the shapes `config` implies.
  static ModelParams zeros(const ModelConfig& config);

  std::size_t parameter_count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Visits every tensor in the fixed checkpoint order: embedding, each
/// layer's tensors (see LayerParams), out_proj, out_bias. Names look like
/// "embedding", "layer1.W_c", "out_proj".
template <class Params, class Fn>
  requires std::same_as<std::remove_const_t<Params>, ModelParams>
void for_each_tensor(Params& p, Fn&& fn) {
  fn(std::string{"embedding"}, p.embedding.values());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for_each_tensor(p.layers[l], [&](std::string_view name, auto values) {
      fn(prefix + std::string(name), values);
    });
  }
  fn(std::string{"out_proj"}, p.out_proj.values());
  fn(std::string{"out_bias"}, std::span{p.out_bias});
}

struct ModelState {
  std::vector<LayerState> layers;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Parameters are drawn from `rng` first (uniform +-init_scale, embedding,
/// layers, projection in that order); the initial state is drawn after.
struct InitializedModel {
  ModelParams params;
  ModelState state;
};
InitializedModel init_model(const ModelConfig& config, std::size_t batch, SeededRng& rng);
ModelParams init_params(const ModelConfig& config, SeededRng& rng);

/// h = 0 and cells per config.cell_init for every layer.
ModelState init_state(const ModelConfig& config, std::size_t batch, SeededRng& rng);

/// Forward-pass bookkeeping for one timestep.
struct StepTrace {
  std::vector<TokenId> inputs;        // [batch]
  std::vector<RealMatrix> masks;      // num_layers + 1 dropout masks; empty when inactive
  std::vector<StepCache> layers;
  RealMatrix top;                     // dropped output of the last layer, fed to the projection
};

struct WindowCache {
  bool train_mode = false;
  std::size_t batch = 0;
  std::vector<StepTrace> steps;
  std::vector<RealMatrix> probs;      // per step [batch x vocab]
};

struct WindowOutput {
  ModelState state;  // state after the final step
  WindowCache cache;
};

/// Runs the unrolled window `inputs` from `state`. In train mode, inverted
/// dropout masks (kept units scaled by 1/(1-p)) are drawn from `rng`;
/// otherwise dropout is the identity. `rng` also drives random_selection.
WindowOutput forward_window(const ModelParams& params, const ModelConfig& config,
                            const ModelState& state, const TokenGrid& inputs, bool train_mode,
                            SeededRng& rng);

/// Mean over every (step, stream) position of -ln p(target).
double loss_window(std::span<const RealMatrix> probs, const TokenGrid& targets);

/// Sum (not mean) of -ln p(target); used for corpus-level perplexity.
double nll_sum(std::span<const RealMatrix> probs, const TokenGrid& targets);

/// Exact gradient of loss_window w.r.t. every parameter, treating the
/// window's initial state as a constant.
ModelParams backward_window(const ModelParams& params, const ModelConfig& config,
                            const WindowCache& cache, const TokenGrid& targets);

/// The next window starts from the values of the previous final state; no
/// gradient crosses the boundary, so this is a plain copy.
inline ModelState carry_state(const ModelState& final_state) { return final_state; }

/// Autoregressive continuation of `prompt` (an empty prompt starts from
/// <eos>). temperature == 0 is greedy argmax decoding; otherwise tokens are
/// sampled from softmax(logits / temperature) with a generator seeded by
/// `seed`. The initial state is the evaluation state for `config`.
std::vector<TokenId> generate(const ModelParams& params, const ModelConfig& config,
                              const Vocabulary& vocab, std::span<const TokenId> prompt,
                              std::size_t length, double temperature, std::uint64_t seed);

/// Sub-stream ids passed to derive_seed().
inline constexpr std::uint64_t kTrainStream = 1;
inline constexpr std::uint64_t kEvalStream = 2;
inline constexpr std::uint64_t kGenerateStream = 3;

/// Initial state used by evaluation and generation: h = 0, cells per
/// config.cell_init drawn from a generator seeded by
/// derive_seed(config.seed, kEvalStream).
ModelState evaluation_state(const ModelConfig& config, std::size_t batch);

}  // namespace mlstm
