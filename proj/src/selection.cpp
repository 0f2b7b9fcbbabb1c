// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/selection.hpp"

#include <algorithm>
#include <string>

#include "mlstm/error.hpp"

namespace mlstm {

namespace {

std::int32_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return static_cast<std::int32_t>(best);
}

std::int32_t argmin(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return static_cast<std::int32_t>(best);
}

}  // namespace

std::string_view to_string(SelectionKind kind) noexcept {
  switch (kind) {
    case SelectionKind::simple_mean:
      return "simple_mean";
    case SelectionKind::weighted_sum:
      return "weighted_sum";
    case SelectionKind::random_selection:
      return "random_selection";
    case SelectionKind::max_pooling:
      return "max_pooling";
    case SelectionKind::min_max_pooling:
      return "min_max_pooling";
    case SelectionKind::learnable_weights:
      return "learnable_weights";
  }
  return "unknown";
}

SelectionKind parse_selection_kind(std::string_view name) {
  for (SelectionKind kind :
       {SelectionKind::simple_mean, SelectionKind::weighted_sum, SelectionKind::random_selection,
        SelectionKind::max_pooling, SelectionKind::min_max_pooling,
        SelectionKind::learnable_weights}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorKind::config, "unknown selection strategy '" + std::string(name) + "'");
}

RealVector static_weights(std::size_t m) {
  require(m >= 1, ErrorKind::invalid_argument, "static_weights: m must be >= 1");
  RealVector w(m);
  const double norm = static_cast<double>(m) * static_cast<double>(m + 1);
  for (std::size_t i = 0; i < m; ++i) w[i] = 2.0 * static_cast<double>(m - i) / norm;
  return w;
}

SelectionStrategy SelectionStrategy::make(SelectionKind kind, std::size_t m, double output_threshold) {
  require(m >= 1, ErrorKind::invalid_argument, "selection: m must be >= 1");
  require(output_threshold > 0.0 && output_threshold < 1.0, ErrorKind::invalid_argument,
          "selection: output threshold must lie in (0, 1)");
  SelectionStrategy s;
  s.kind = kind;
  s.output_threshold = output_threshold;
  if (kind == SelectionKind::weighted_sum) s.weights = static_weights(m);
  return s;
}

NodeSelection select_node(std::span<const double> cells, double output_gate,
                          const SelectionStrategy& strategy, std::span<const double> cell_weights,
                          SeededRng& rng) {
  const std::size_t m = cells.size();
  require(m >= 1, ErrorKind::invalid_argument, "select_node: no cells");
  NodeSelection out;
  switch (strategy.kind) {
    case SelectionKind::simple_mean: {
      // Anchored at the first cell so that m equal cells give exactly that value.
      double spread = 0.0;
      for (std::size_t k = 1; k < m; ++k) spread += cells[k] - cells[0];
      out.value = cells[0] + spread / static_cast<double>(m);
      break;
    }
    case SelectionKind::weighted_sum: {
      require(strategy.weights.size() == m, ErrorKind::shape,
              "select_node: static weight count does not match cell count");
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) sum += cells[k] * strategy.weights[k];
      out.value = sum;
      break;
    }
    case SelectionKind::random_selection:
      out.index = static_cast<std::int32_t>(rng.uniform_index(m));
      out.value = cells[static_cast<std::size_t>(out.index)];
      break;
    case SelectionKind::max_pooling:
      out.index = argmax(cells);
      out.value = cells[static_cast<std::size_t>(out.index)];
      break;
    case SelectionKind::min_max_pooling:
      out.min_branch = output_gate < strategy.output_threshold;
      out.index = out.min_branch ? argmin(cells) : argmax(cells);
      out.value = cells[static_cast<std::size_t>(out.index)];
      break;
    case SelectionKind::learnable_weights: {
      require(cell_weights.size() == m, ErrorKind::invalid_argument,
              "select_node: learnable_weights needs one weight per cell");
      std::size_t best = 0;
      double best_value = cells[0] * cell_weights[0];
      for (std::size_t k = 1; k < m; ++k) {
        const double v = cells[k] * cell_weights[k];
        if (v > best_value) {
          best = k;
          best_value = v;
        }
      }
      out.index = static_cast<std::int32_t>(best);
      out.value = best_value;
      break;
    }
  }
  return out;
}

void select_node_backward(const NodeSelection& selection, const SelectionStrategy& strategy,
                          std::span<const double> cells, std::span<const double> cell_weights,
                          double grad_c_eff, std::span<double> grad_cells,
                          std::span<double> grad_cell_weights) {
  const std::size_t m = cells.size();
  require(grad_cells.size() == m, ErrorKind::shape, "select_node_backward: gradient length mismatch");
  std::fill(grad_cells.begin(), grad_cells.end(), 0.0);
  switch (strategy.kind) {
    case SelectionKind::simple_mean: {
      const double share = grad_c_eff / static_cast<double>(m);
      std::fill(grad_cells.begin(), grad_cells.end(), share);
      return;
    }
    case SelectionKind::weighted_sum:
      for (std::size_t k = 0; k < m; ++k) grad_cells[k] = grad_c_eff * strategy.weights[k];
      return;
    case SelectionKind::random_selection:
    case SelectionKind::max_pooling:
    case SelectionKind::min_max_pooling:
      require(selection.index >= 0 && static_cast<std::size_t>(selection.index) < m,
              ErrorKind::invalid_argument, "select_node_backward: record carries no valid index");
      grad_cells[static_cast<std::size_t>(selection.index)] = grad_c_eff;
      return;
    case SelectionKind::learnable_weights: {
      require(selection.index >= 0 && static_cast<std::size_t>(selection.index) < m,
              ErrorKind::invalid_argument, "select_node_backward: record carries no valid index");
      require(cell_weights.size() == m && grad_cell_weights.size() == m, ErrorKind::invalid_argument,
              "select_node_backward: learnable_weights needs weights and weight gradients");
      const auto idx = static_cast<std::size_t>(selection.index);
      grad_cells[idx] = grad_c_eff * cell_weights[idx];
      grad_cell_weights[idx] += grad_c_eff * cells[idx];
      return;
    }
  }
}

LayerSelection select_forward(const CellBank& cells, const RealMatrix& output_gate,
                              const SelectionStrategy& strategy, const RealMatrix* cell_weights,
                              SeededRng& rng) {
  const bool learnable = strategy.kind == SelectionKind::learnable_weights;
  require(!learnable || cell_weights != nullptr, ErrorKind::invalid_argument,
          "select_forward: learnable_weights requires cell weights");
  require(output_gate.rows() == cells.batch() && output_gate.cols() == cells.nodes(),
          ErrorKind::shape, "select_forward: output gate shape mismatch");
  if (learnable) {
    require(cell_weights->rows() == cells.nodes() && cell_weights->cols() == cells.cells(),
            ErrorKind::shape, "select_forward: cell weight shape mismatch");
  }

  LayerSelection out;
  out.c_eff = RealMatrix(cells.batch(), cells.nodes());
  out.record.kind = strategy.kind;
  out.record.batch = cells.batch();
  out.record.nodes = cells.nodes();
  out.record.entries.resize(cells.batch() * cells.nodes());
  for (std::size_t b = 0; b < cells.batch(); ++b) {
    for (std::size_t j = 0; j < cells.nodes(); ++j) {
      const std::span<const double> weights =
          learnable ? cell_weights->row(j) : std::span<const double>{};
      const NodeSelection sel = select_node(cells.node(b, j), output_gate(b, j), strategy, weights, rng);
      out.c_eff(b, j) = sel.value;
      out.record.entries[b * cells.nodes() + j] = sel;
    }
  }
  return out;
}

LayerSelectionGrads select_backward(const SelectionRecord& record, const SelectionStrategy& strategy,
                                    const CellBank& cells, const RealMatrix* cell_weights,
                                    const RealMatrix& grad_c_eff) {
  require(record.kind == strategy.kind, ErrorKind::invalid_argument,
          "select_backward: record was produced by a different strategy");
  require(record.batch == cells.batch() && record.nodes == cells.nodes() &&
              grad_c_eff.rows() == cells.batch() && grad_c_eff.cols() == cells.nodes(),
          ErrorKind::shape, "select_backward: shape mismatch");
  const bool learnable = strategy.kind == SelectionKind::learnable_weights;
  require(!learnable || cell_weights != nullptr, ErrorKind::invalid_argument,
          "select_backward: learnable_weights requires cell weights");

  LayerSelectionGrads out;
  out.grad_cells = CellBank(cells.batch(), cells.nodes(), cells.cells());
  if (learnable) out.grad_cell_weights = RealMatrix(cells.nodes(), cells.cells());
  for (std::size_t b = 0; b < cells.batch(); ++b) {
    for (std::size_t j = 0; j < cells.nodes(); ++j) {
      select_node_backward(record.at(b, j), strategy, cells.node(b, j),
                           learnable ? cell_weights->row(j) : std::span<const double>{},
                           grad_c_eff(b, j), out.grad_cells.node(b, j),
                           learnable ? out.grad_cell_weights.row(j) : std::span<double>{});
    }
  }
  return out;
}

}  // namespace mlstm
