// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/language_model.hpp"

#include <algorithm>
#include <cmath>

#include "mlstm/error.hpp"
#include "mlstm/numerics/kernels.hpp"
#include "mlstm/numerics/ops.hpp"

namespace mlstm {

namespace {

RealMatrix draw_mask(std::size_t rows, std::size_t cols, double rate, SeededRng& rng) {
  RealMatrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& v : mask.values()) v = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return mask;
}

void apply_mask(RealMatrix& values, const RealMatrix& mask) {
  if (mask.empty()) return;
  auto v = values.values();
  const auto m = mask.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= m[k];
}

// One timestep of the full stack; returns the logits and advances `state`.
RealMatrix forward_step(const ModelParams& params, const ModelConfig& config,
                        const SelectionStrategy& strategy, ModelState& state,
                        std::span<const TokenId> tokens, bool dropout_active, SeededRng& rng,
                        StepTrace* trace) {
  const std::size_t batch = tokens.size();
  RealMatrix x(batch, config.embed_dim);
  for (std::size_t b = 0; b < batch; ++b) {
    require(tokens[b] < config.vocab_size, ErrorKind::invalid_argument,
            "forward: token id " + std::to_string(tokens[b]) + " outside the vocabulary");
    const auto row = params.embedding.row(tokens[b]);
    std::copy(row.begin(), row.end(), x.row(b).begin());
  }

  RealMatrix mask;
  if (dropout_active) mask = draw_mask(batch, config.embed_dim, config.dropout_rate, rng);
  apply_mask(x, mask);
  if (trace != nullptr) {
    trace->inputs.assign(tokens.begin(), tokens.end());
    trace->masks.push_back(std::move(mask));
  }

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    StepOutput out = step_forward(params.layers[l], state.layers[l], x, strategy, rng);
    x = out.state.h;
    state.layers[l] = std::move(out.state);
    RealMatrix layer_mask;
    if (dropout_active) layer_mask = draw_mask(batch, config.hidden_dim, config.dropout_rate, rng);
    apply_mask(x, layer_mask);
    if (trace != nullptr) {
      trace->layers.push_back(std::move(out.cache));
      trace->masks.push_back(std::move(layer_mask));
    }
  }

  RealMatrix logits(batch, config.vocab_size);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(params.out_bias.begin(), params.out_bias.end(), logits.row(b).begin());
  }
  matmul_nt_acc(logits, x, params.out_proj);
  if (trace != nullptr) trace->top = std::move(x);
  return logits;
}

void check_state(const ModelConfig& config, const ModelState& state, std::size_t batch) {
  require(state.layers.size() == config.num_layers, ErrorKind::shape, "model state: layer count mismatch");
  for (const LayerState& s : state.layers) {
    require(s.h.rows() == batch && s.h.cols() == config.hidden_dim && s.cells.batch() == batch &&
                s.cells.nodes() == config.hidden_dim && s.cells.cells() == config.cells,
            ErrorKind::shape, "model state: shape does not match the configuration/batch");
  }
}

std::size_t argmax_index(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

void ModelConfig::validate() const {
  auto check = [](bool ok, const std::string& message) { require(ok, ErrorKind::config, message); };
  check(vocab_size >= 1, "vocab_size must be >= 1 (empty vocabulary)");
  check(embed_dim >= 1, "embed_dim must be >= 1");
  check(hidden_dim >= 1, "hidden_dim must be >= 1");
  check(num_layers >= 1, "num_layers must be >= 1");
  check(cells >= 1, "cells must be >= 1");
  check(output_threshold > 0.0 && output_threshold < 1.0, "o_thr must lie in (0, 1)");
  check(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
  check(init_scale >= 0.0 && std::isfinite(init_scale), "init_scale must be finite and >= 0");
  check(cell_init == CellInit::zero || jitter_scale > 0.0, "jitter_scale must be > 0");
}

SelectionStrategy ModelConfig::selection() const {
  return SelectionStrategy::make(strategy, cells, output_threshold);
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  ModelParams p;
  const bool learnable = config.strategy == SelectionKind::learnable_weights;
  p.embedding = RealMatrix(config.vocab_size, config.embed_dim);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t in = l == 0 ? config.embed_dim : config.hidden_dim;
    p.layers.push_back(LayerParams::zeros(in, config.hidden_dim, config.cells, learnable));
  }
  p.out_proj = RealMatrix(config.vocab_size, config.hidden_dim);
  p.out_bias.assign(config.vocab_size, 0.0);
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for_each_tensor(*this, [&](const std::string&, std::span<const double> v) { count += v.size(); });
  return count;
}

ModelParams init_params(const ModelConfig& config, SeededRng& rng) {
  config.validate();
  const bool learnable = config.strategy == SelectionKind::learnable_weights;
  ModelParams p;
  p.embedding = RealMatrix(config.vocab_size, config.embed_dim);
  if (config.init_scale > 0.0) {
    for (double& v : p.embedding.values()) v = rng.uniform(-config.init_scale, config.init_scale);
  }
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t in = l == 0 ? config.embed_dim : config.hidden_dim;
    p.layers.push_back(
        init_layer_params(in, config.hidden_dim, config.cells, learnable, config.init_scale, rng));
  }
  p.out_proj = RealMatrix(config.vocab_size, config.hidden_dim);
  if (config.init_scale > 0.0) {
    for (double& v : p.out_proj.values()) v = rng.uniform(-config.init_scale, config.init_scale);
  }
  p.out_bias.assign(config.vocab_size, 0.0);
  return p;
}

ModelState init_state(const ModelConfig& config, std::size_t batch, SeededRng& rng) {
  ModelState s;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    s.layers.push_back(init_layer_state(batch, config.hidden_dim, config.cells, config.cell_init,
                                        config.jitter_scale, rng));
  }
  return s;
}

InitializedModel init_model(const ModelConfig& config, std::size_t batch, SeededRng& rng) {
  InitializedModel m;
  m.params = init_params(config, rng);
  m.state = init_state(config, batch, rng);
  return m;
}

ModelState evaluation_state(const ModelConfig& config, std::size_t batch) {
  SeededRng rng(derive_seed(config.seed, kEvalStream));
  return init_state(config, batch, rng);
}

WindowOutput forward_window(const ModelParams& params, const ModelConfig& config,
                            const ModelState& state, const TokenGrid& inputs, bool train_mode,
                            SeededRng& rng) {
  require(params.layers.size() == config.num_layers, ErrorKind::shape,
          "forward_window: parameters do not match the configuration");
  check_state(config, state, inputs.batch);
  const SelectionStrategy strategy = config.selection();
  const bool dropout_active = train_mode && config.dropout_rate > 0.0;

  WindowOutput out;
  out.state = state;
  out.cache.train_mode = train_mode;
  out.cache.batch = inputs.batch;
  out.cache.steps.reserve(inputs.steps);
  out.cache.probs.reserve(inputs.steps);
  for (std::size_t t = 0; t < inputs.steps; ++t) {
    StepTrace trace;
    RealMatrix logits =
        forward_step(params, config, strategy, out.state, inputs.step(t), dropout_active, rng, &trace);
    for (std::size_t b = 0; b < logits.rows(); ++b) softmax_inplace(logits.row(b));
    out.cache.steps.push_back(std::move(trace));
    out.cache.probs.push_back(std::move(logits));
  }
  return out;
}

double nll_sum(std::span<const RealMatrix> probs, const TokenGrid& targets) {
  require(probs.size() == targets.steps, ErrorKind::shape, "loss: step count mismatch");
  double total = 0.0;
  for (std::size_t t = 0; t < targets.steps; ++t) {
    require(probs[t].rows() == targets.batch, ErrorKind::shape, "loss: batch size mismatch");
    for (std::size_t b = 0; b < targets.batch; ++b) {
      total += cross_entropy(probs[t].row(b), targets.at(t, b));
    }
  }
  return total;
}

double loss_window(std::span<const RealMatrix> probs, const TokenGrid& targets) {
  require(targets.steps * targets.batch > 0, ErrorKind::shape, "loss: empty window");
  return nll_sum(probs, targets) / static_cast<double>(targets.steps * targets.batch);
}

ModelParams backward_window(const ModelParams& params, const ModelConfig& config,
                            const WindowCache& cache, const TokenGrid& targets) {
  require(cache.steps.size() == targets.steps && cache.probs.size() == targets.steps &&
              cache.batch == targets.batch,
          ErrorKind::shape, "backward_window: cache does not match the targets");
  require(targets.steps > 0, ErrorKind::shape, "backward_window: empty window");
  const SelectionStrategy strategy = config.selection();
  const std::size_t batch = targets.batch;
  const std::size_t layers = config.num_layers;
  const double inv_count = 1.0 / static_cast<double>(targets.steps * batch);

  ModelParams grads = ModelParams::zeros(config);
  std::vector<RealMatrix> grad_h_next(layers, RealMatrix(batch, config.hidden_dim));
  std::vector<CellBank> grad_cells_next(layers);

  for (std::size_t t = targets.steps; t-- > 0;) {
    const StepTrace& trace = cache.steps[t];
    require(trace.layers.size() == layers, ErrorKind::shape, "backward_window: malformed cache");

    // Softmax + mean cross-entropy: dL/dlogits = (p - onehot) / count.
    RealMatrix grad_logits = cache.probs[t];
    for (std::size_t b = 0; b < batch; ++b) {
      const TokenId target = targets.at(t, b);
      require(target < config.vocab_size, ErrorKind::invalid_argument,
              "backward_window: target outside the vocabulary");
      grad_logits(b, target) -= 1.0;
      kernels::scale(inv_count, grad_logits.row(b));
    }
    matmul_tn_acc(grads.out_proj, grad_logits, trace.top);
    column_sums_acc(grads.out_bias, grad_logits);

    RealMatrix grad_above(batch, config.hidden_dim);
    matmul_nn_acc(grad_above, grad_logits, params.out_proj);
    apply_mask(grad_above, trace.masks[layers]);

    for (std::size_t l = layers; l-- > 0;) {
      RealMatrix grad_h = std::move(grad_above);
      kernels::axpy(1.0, grad_h_next[l].values(), grad_h.values());
      StepGrads sg = step_backward(params.layers[l], trace.layers[l], grad_h, grad_cells_next[l],
                                   strategy, grads.layers[l]);
      grad_h_next[l] = std::move(sg.grad_h_prev);
      grad_cells_next[l] = std::move(sg.grad_cells_prev);
      grad_above = std::move(sg.grad_x);
      apply_mask(grad_above, trace.masks[l]);
    }

    for (std::size_t b = 0; b < batch; ++b) {
      kernels::axpy(1.0, grad_above.row(b), grads.embedding.row(trace.inputs[b]));
    }
  }
  return grads;
}

std::vector<TokenId> generate(const ModelParams& params, const ModelConfig& config,
                              const Vocabulary& vocab, std::span<const TokenId> prompt,
                              std::size_t length, double temperature, std::uint64_t seed) {
  require(vocab.size() >= 1 && config.vocab_size == vocab.size(), ErrorKind::invalid_argument,
          "generate: empty or mismatched vocabulary");
  require(temperature >= 0.0 && std::isfinite(temperature), ErrorKind::invalid_argument,
          "generate: temperature must be finite and >= 0");
  std::vector<TokenId> continuation;
  if (length == 0) return continuation;

  const SelectionStrategy strategy = config.selection();
  ModelState state = evaluation_state(config, 1);
  SeededRng rng(derive_seed(seed, kGenerateStream));

  std::vector<TokenId> context(prompt.begin(), prompt.end());
  if (context.empty()) context.push_back(vocab.eos_id());
  RealMatrix logits;
  for (TokenId token : context) {
    const TokenId one[] = {token};
    logits = forward_step(params, config, strategy, state, one, false, rng, nullptr);
  }

  continuation.reserve(length);
  for (std::size_t k = 0; k < length; ++k) {
    std::span<double> row = logits.row(0);
    TokenId next;
    if (temperature == 0.0) {
      next = static_cast<TokenId>(argmax_index(row));
    } else {
      for (double& z : row) z /= temperature;
      softmax_inplace(row);
      const double u = rng.uniform();
      double cumulative = 0.0;
      next = static_cast<TokenId>(row.size() - 1);
      for (std::size_t v = 0; v < row.size(); ++v) {
        cumulative += row[v];
        if (u < cumulative) {
          next = static_cast<TokenId>(v);
          break;
        }
      }
    }
    continuation.push_back(next);
    if (k + 1 < length) {
      const TokenId one[] = {next};
      logits = forward_step(params, config, strategy, state, one, false, rng, nullptr);
    }
  }
  return continuation;
}

}  // namespace mlstm
