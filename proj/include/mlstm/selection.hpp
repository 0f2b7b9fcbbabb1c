// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Cell-selection strategies: each multi-cell node reduces its m memory-cell
// values to a single effective value c_eff, from which the node output is
// o * tanh(c_eff).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mlstm/cell_bank.hpp"
#include "mlstm/numerics/matrix.hpp"
#include "mlstm/numerics/rng.hpp"

namespace mlstm {

enum class SelectionKind {
  simple_mean,
  weighted_sum,
  random_selection,
  max_pooling,
  min_max_pooling,
  learnable_weights,
};

std::string_view to_string(SelectionKind kind) noexcept;
/// Accepts the names produced by to_string(); throws Error(config) otherwise.
SelectionKind parse_selection_kind(std::string_view name);

/// Static weights for the weighted-sum strategy: a normalized linear ramp
/// w_i = 2(m - i + 1) / (m(m + 1)), i = 1..m. Strictly decreasing, sums to 1.
RealVector static_weights(std::size_t m);

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::max_pooling;
  /// Output-gate threshold for min_max_pooling; must lie in (0, 1).
  double output_threshold = 0.5;
  /// Filled for weighted_sum only.
  RealVector weights;

  /// Builds a validated strategy for nodes with m cells.
  static SelectionStrategy make(SelectionKind kind, std::size_t m, double output_threshold = 0.5);
};

/// Outcome of selecting over one node's cells.
struct NodeSelection {
  static constexpr std::int32_t kNoIndex = -1;

  double value = 0.0;
  /// Winning cell for random/max/min-max/learnable strategies.
  std::int32_t index = kNoIndex;
  /// min_max_pooling: true when the min branch was taken (o < o_thr).
  bool min_branch = false;
};

/// Per-(stream, node) selections for one layer and one timestep.
struct SelectionRecord {
  SelectionKind kind = SelectionKind::max_pooling;
  std::size_t batch = 0;
  std::size_t nodes = 0;
  std::vector<NodeSelection> entries;  // batch * nodes, row-major

  const NodeSelection& at(std::size_t b, std::size_t node) const { return entries[b * nodes + node]; }
};

/// Selection over a single node. `output_gate` is only read by min_max_pooling;
/// `cell_weights` (length m) is required for learnable_weights and ignored
/// otherwise. Ties go to the lowest index.
NodeSelection select_node(std::span<const double> cells, double output_gate,
                          const SelectionStrategy& strategy, std::span<const double> cell_weights,
                          SeededRng& rng);

/// Gradients of c_eff for a single node. Writes d c_eff / d cell into
/// `grad_cells` (overwritten) and, for learnable_weights, accumulates into
/// `grad_cell_weights`. Winner-take-all strategies route the whole gradient
/// to the recorded cell; branch and argmax decisions are treated as
/// constants.
void select_node_backward(const NodeSelection& selection, const SelectionStrategy& strategy,
                          std::span<const double> cells, std::span<const double> cell_weights,
                          double grad_c_eff, std::span<double> grad_cells,
                          std::span<double> grad_cell_weights);

struct LayerSelection {
  RealMatrix c_eff;  // [batch x nodes]
  SelectionRecord record;
};

/// Selection for a whole layer. `output_gate` is [batch x nodes];
/// `cell_weights` is [nodes x m] and must be non-null iff the strategy is
/// learnable_weights. Random draws are made per stream, per node, in
/// row-major order.
LayerSelection select_forward(const CellBank& cells, const RealMatrix& output_gate,
                              const SelectionStrategy& strategy, const RealMatrix* cell_weights,
                              SeededRng& rng);

struct LayerSelectionGrads {
  CellBank grad_cells;
  RealMatrix grad_cell_weights;  // [nodes x m]; empty unless learnable_weights
};

LayerSelectionGrads select_backward(const SelectionRecord& record, const SelectionStrategy& strategy,
                                    const CellBank& cells, const RealMatrix* cell_weights,
                                    const RealMatrix& grad_c_eff);

}  // namespace mlstm
