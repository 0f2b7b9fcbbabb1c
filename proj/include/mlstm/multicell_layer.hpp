// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// One recurrent layer of multi-cell LSTM nodes.
//
// Every node computes a single gate triple (i, f, o) and a single modulated
// input a from (x, h_prev). The gates are broadcast to the node's m memory
// cells, each updated as c_k <- i * a + f * c_k, and the selection strategy
// reduces the updated cells to c_eff; the node emits h = o * tanh(c_eff).
// With m = 1 this is exactly the standard LSTM node.

#include <concepts>
#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>

#include "mlstm/cell_bank.hpp"
#include "mlstm/numerics/matrix.hpp"
#include "mlstm/numerics/rng.hpp"
#include "mlstm/selection.hpp"

namespace mlstm {

enum class CellInit { zero, jitter };

std::string_view to_string(CellInit init) noexcept;
CellInit parse_cell_init(std::string_view name);

inline constexpr double kDefaultJitterScale = 0.01;

/// Trainable weights of one layer. Input matrices are [n x in], recurrent
/// matrices [n x n], biases [n]. `cell_weights` is [n x m] and is only
/// allocated for the learnable_weights strategy.
struct LayerParams {
  RealMatrix w_c, u_c;
  RealVector b_c;
  RealMatrix w_i, u_i;
  RealVector b_i;
  RealMatrix w_f, u_f;
  RealVector b_f;
  RealMatrix w_o, u_o;
  RealVector b_o;
  RealMatrix cell_weights;

  std::size_t input_dim() const noexcept { return w_c.cols(); }
  std::size_t nodes() const noexcept { return w_c.rows(); }

  /// All-zero parameters (and all-zero cell weights when requested); the
  /// shape used for gradient accumulators.
  static LayerParams zeros(std::size_t input_dim, std::size_t nodes, std::size_t cells,
                           bool with_cell_weights);

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Visits every tensor of a layer in the fixed serialization order:
/// W_c U_c b_c W_i U_i b_i W_f U_f b_f W_o U_o b_o [cell_weights].
template <class Params, class Fn>
  requires std::same_as<std::remove_const_t<Params>, LayerParams>
void for_each_tensor(Params& p, Fn&& fn) {
  fn(std::string_view{"W_c"}, p.w_c.values());
  fn(std::string_view{"U_c"}, p.u_c.values());
  fn(std::string_view{"b_c"}, std::span{p.b_c});
  fn(std::string_view{"W_i"}, p.w_i.values());
  fn(std::string_view{"U_i"}, p.u_i.values());
  fn(std::string_view{"b_i"}, std::span{p.b_i});
  fn(std::string_view{"W_f"}, p.w_f.values());
  fn(std::string_view{"U_f"}, p.u_f.values());
  fn(std::string_view{"b_f"}, std::span{p.b_f});
  fn(std::string_view{"W_o"}, p.w_o.values());
  fn(std::string_view{"U_o"}, p.u_o.values());
  fn(std::string_view{"b_o"}, std::span{p.b_o});
  if (!p.cell_weights.empty()) fn(std::string_view{"W_cell"}, p.cell_weights.values());
}

/// Weights uniform in [-scale, scale] (drawn in serialization order), biases
/// zero, cell weights (learnable_weights only) set to one.
LayerParams init_layer_params(std::size_t input_dim, std::size_t nodes, std::size_t cells,
                              bool with_cell_weights, double scale, SeededRng& rng);

struct LayerState {
  RealMatrix h;    // [batch x nodes]
  CellBank cells;  // [batch x nodes x m]

  friend bool operator==(const LayerState&, const LayerState&) = default;
};

/// h = 0; cells = 0 (zero) or i.i.d. U[-jitter_scale, jitter_scale] (jitter).
LayerState init_layer_state(std::size_t batch, std::size_t nodes, std::size_t cells, CellInit mode,
                            double jitter_scale, SeededRng& rng);

/// Everything step_backward needs from one forward step.
struct StepCache {
  SelectionKind kind = SelectionKind::max_pooling;
  RealMatrix x;
  RealMatrix h_prev;
  CellBank cells_prev;
  RealMatrix a, i, f, o;
  RealMatrix tanh_c_eff;
  SelectionRecord record;
};

struct StepOutput {
  LayerState state;  // state.h is the step output
  StepCache cache;
};

/// One timestep for a batch. `x` is [batch x input_dim].
StepOutput step_forward(const LayerParams& params, const LayerState& state, const RealMatrix& x,
                        const SelectionStrategy& strategy, SeededRng& rng);

struct StepGrads {
  RealMatrix grad_x;        // [batch x input_dim]
  RealMatrix grad_h_prev;   // [batch x nodes]
  CellBank grad_cells_prev; // [batch x nodes x m]
};

/// Reverse-mode derivative of step_forward. `grad_h` is dLoss/dh for this
/// step, `grad_cells_future` is dLoss/dcells flowing back from the next step
/// (an empty bank means zero). Parameter gradients are accumulated into
/// `grads`.
StepGrads step_backward(const LayerParams& params, const StepCache& cache, const RealMatrix& grad_h,
                        const CellBank& grad_cells_future, const SelectionStrategy& strategy,
                        LayerParams& grads);

}  // namespace mlstm
