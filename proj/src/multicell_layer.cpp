// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/multicell_layer.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "mlstm/error.hpp"
#include "mlstm/numerics/ops.hpp"

namespace mlstm {

namespace {

void fill_uniform(std::span<double> values, double scale, SeededRng& rng) {
  if (scale == 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (double& v : values) v = rng.uniform(-scale, scale);
}

// Gate preactivation grads -> weight grads, input grad, recurrent grad.
void backprop_gate(const RealMatrix& grad_pre, const RealMatrix& w, const RealMatrix& u,
                   const StepCache& cache, RealMatrix& grad_w, RealMatrix& grad_u,
                   RealVector& grad_b, StepGrads& out) {
  matmul_tn_acc(grad_w, grad_pre, cache.x);
  matmul_tn_acc(grad_u, grad_pre, cache.h_prev);
  column_sums_acc(grad_b, grad_pre);
  matmul_nn_acc(out.grad_x, grad_pre, w);
  matmul_nn_acc(out.grad_h_prev, grad_pre, u);
}

}  // namespace

std::string_view to_string(CellInit init) noexcept {
  return init == CellInit::zero ? "zero" : "jitter";
}

CellInit parse_cell_init(std::string_view name) {
  if (name == "zero") return CellInit::zero;
  if (name == "jitter") return CellInit::jitter;
  fail(ErrorKind::config, "unknown cell_init '" + std::string(name) + "' (expected zero|jitter)");
}

LayerParams LayerParams::zeros(std::size_t input_dim, std::size_t nodes, std::size_t cells,
                               bool with_cell_weights) {
  LayerParams p;
  for (auto* pair : {&p.w_c, &p.w_i, &p.w_f, &p.w_o}) *pair = RealMatrix(nodes, input_dim);
  for (auto* pair : {&p.u_c, &p.u_i, &p.u_f, &p.u_o}) *pair = RealMatrix(nodes, nodes);
  for (auto* bias : {&p.b_c, &p.b_i, &p.b_f, &p.b_o}) bias->assign(nodes, 0.0);
  if (with_cell_weights) p.cell_weights = RealMatrix(nodes, cells);
  return p;
}

LayerParams init_layer_params(std::size_t input_dim, std::size_t nodes, std::size_t cells,
                              bool with_cell_weights, double scale, SeededRng& rng) {
  require(input_dim >= 1 && nodes >= 1 && cells >= 1, ErrorKind::invalid_argument,
          "init_layer_params: dimensions must be >= 1");
  require(scale >= 0.0, ErrorKind::invalid_argument, "init_layer_params: scale must be >= 0");
  LayerParams p = LayerParams::zeros(input_dim, nodes, cells, with_cell_weights);
  for (RealMatrix* m : {&p.w_c, &p.u_c, &p.w_i, &p.u_i, &p.w_f, &p.u_f, &p.w_o, &p.u_o}) {
    fill_uniform(m->values(), scale, rng);
  }
  if (with_cell_weights) p.cell_weights.fill(1.0);
  return p;
}

LayerState init_layer_state(std::size_t batch, std::size_t nodes, std::size_t cells, CellInit mode,
                            double jitter_scale, SeededRng& rng) {
  LayerState s{RealMatrix(batch, nodes), CellBank(batch, nodes, cells)};
  if (mode == CellInit::jitter) {
    require(jitter_scale > 0.0, ErrorKind::invalid_argument, "init_layer_state: jitter scale must be > 0");
    for (double& c : s.cells.values()) c = rng.uniform(-jitter_scale, jitter_scale);
  }
  return s;
}

StepOutput step_forward(const LayerParams& params, const LayerState& state, const RealMatrix& x,
                        const SelectionStrategy& strategy, SeededRng& rng) {
  const std::size_t n = params.nodes();
  const std::size_t batch = x.rows();
  require(x.cols() == params.input_dim(), ErrorKind::shape, "step_forward: input width mismatch");
  require(state.h.rows() == batch && state.h.cols() == n && state.cells.batch() == batch &&
              state.cells.nodes() == n,
          ErrorKind::shape, "step_forward: state shape mismatch");
  require(strategy.kind != SelectionKind::weighted_sum || strategy.weights.size() == state.cells.cells(),
          ErrorKind::shape, "step_forward: static weight count does not match cell count");
  require(strategy.kind != SelectionKind::learnable_weights ||
              (params.cell_weights.rows() == n && params.cell_weights.cols() == state.cells.cells()),
          ErrorKind::shape, "step_forward: cell weights do not match the cell bank");

  StepOutput out;
  StepCache& cache = out.cache;
  cache.kind = strategy.kind;
  cache.x = x;
  cache.h_prev = state.h;
  cache.cells_prev = state.cells;

  cache.a = affine_batch(params.w_c, x, params.u_c, state.h, params.b_c);
  cache.i = affine_batch(params.w_i, x, params.u_i, state.h, params.b_i);
  cache.f = affine_batch(params.w_f, x, params.u_f, state.h, params.b_f);
  cache.o = affine_batch(params.w_o, x, params.u_o, state.h, params.b_o);
  apply_activation_inplace(cache.a.values(), Activation::tanh);
  apply_activation_inplace(cache.i.values(), Activation::sigmoid);
  apply_activation_inplace(cache.f.values(), Activation::sigmoid);
  apply_activation_inplace(cache.o.values(), Activation::sigmoid);

  CellBank cells = state.cells;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < n; ++j) {
      const double write = cache.i(b, j) * cache.a(b, j);
      const double keep = cache.f(b, j);
      for (double& c : cells.node(b, j)) c = write + keep * c;
    }
  }

  const RealMatrix* cell_weights = params.cell_weights.empty() ? nullptr : &params.cell_weights;
  LayerSelection selection = select_forward(cells, cache.o, strategy, cell_weights, rng);
  cache.record = std::move(selection.record);
  cache.tanh_c_eff = std::move(selection.c_eff);
  apply_activation_inplace(cache.tanh_c_eff.values(), Activation::tanh);

  out.state.h = RealMatrix(batch, n);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < n; ++j) out.state.h(b, j) = cache.o(b, j) * cache.tanh_c_eff(b, j);
  }
  out.state.cells = std::move(cells);
  return out;
}

StepGrads step_backward(const LayerParams& params, const StepCache& cache, const RealMatrix& grad_h,
                        const CellBank& grad_cells_future, const SelectionStrategy& strategy,
                        LayerParams& grads) {
  require(cache.kind == strategy.kind && cache.record.kind == strategy.kind,
          ErrorKind::invalid_argument, "step_backward: cache was produced by a different strategy");
  const std::size_t batch = cache.x.rows();
  const std::size_t n = params.nodes();
  const std::size_t m = cache.cells_prev.cells();
  require(grad_h.rows() == batch && grad_h.cols() == n, ErrorKind::shape,
          "step_backward: grad_h shape mismatch");
  const bool has_future = !grad_cells_future.values().empty();
  require(!has_future || grad_cells_future.same_shape(cache.cells_prev), ErrorKind::shape,
          "step_backward: grad_cells_future shape mismatch");
  const bool learnable = strategy.kind == SelectionKind::learnable_weights;
  require(!learnable || (!params.cell_weights.empty() && grads.cell_weights.same_shape(params.cell_weights)),
          ErrorKind::invalid_argument, "step_backward: learnable_weights requires cell weights");

  StepGrads out{RealMatrix(batch, params.input_dim()), RealMatrix(batch, n), CellBank(batch, n, m)};
  RealMatrix grad_pre_a(batch, n), grad_pre_i(batch, n), grad_pre_f(batch, n), grad_pre_o(batch, n);

  std::vector<double> cells_new(m);
  std::vector<double> grad_cells(m);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = cache.a(b, j);
      const double ig = cache.i(b, j);
      const double fg = cache.f(b, j);
      const double og = cache.o(b, j);
      const double tc = cache.tanh_c_eff(b, j);
      const double gh = grad_h(b, j);

      const double grad_o = gh * tc;
      const double grad_c_eff = gh * og * (1.0 - tc * tc);

      // Recompute the updated cells exactly as the forward pass did.
      const auto prev = cache.cells_prev.node(b, j);
      const double write = ig * a;
      for (std::size_t k = 0; k < m; ++k) cells_new[k] = write + fg * prev[k];

      select_node_backward(cache.record.at(b, j), strategy, cells_new,
                           learnable ? params.cell_weights.row(j) : std::span<const double>{},
                           grad_c_eff, grad_cells,
                           learnable ? grads.cell_weights.row(j) : std::span<double>{});
      if (has_future) {
        const auto future = grad_cells_future.node(b, j);
        for (std::size_t k = 0; k < m; ++k) grad_cells[k] += future[k];
      }

      double grad_cell_sum = 0.0;
      double grad_f = 0.0;
      auto grad_prev = out.grad_cells_prev.node(b, j);
      for (std::size_t k = 0; k < m; ++k) {
        grad_cell_sum += grad_cells[k];
        grad_f += grad_cells[k] * prev[k];
        grad_prev[k] = grad_cells[k] * fg;
      }
      const double grad_i = grad_cell_sum * a;
      const double grad_a = grad_cell_sum * ig;

      grad_pre_a(b, j) = grad_a * (1.0 - a * a);
      grad_pre_i(b, j) = grad_i * ig * (1.0 - ig);
      grad_pre_f(b, j) = grad_f * fg * (1.0 - fg);
      grad_pre_o(b, j) = grad_o * og * (1.0 - og);
    }
  }

  backprop_gate(grad_pre_a, params.w_c, params.u_c, cache, grads.w_c, grads.u_c, grads.b_c, out);
  backprop_gate(grad_pre_i, params.w_i, params.u_i, cache, grads.w_i, grads.u_i, grads.b_i, out);
  backprop_gate(grad_pre_f, params.w_f, params.u_f, cache, grads.w_f, grads.u_f, grads.b_f, out);
  backprop_gate(grad_pre_o, params.w_o, params.u_o, cache, grads.w_o, grads.u_o, grads.b_o, out);
  return out;
}

}  // namespace mlstm
