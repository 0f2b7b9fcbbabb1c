// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mlstm {

/// The m memory-cell values of every node of a layer, for every stream of a
/// batch. Cells of one node are contiguous.
class CellBank {
 public:
  CellBank() = default;
  CellBank(std::size_t batch, std::size_t nodes, std::size_t cells, double fill = 0.0)
      : batch_(batch), nodes_(nodes), cells_(cells), values_(batch * nodes * cells, fill) {}

  std::size_t batch() const noexcept { return batch_; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t cells() const noexcept { return cells_; }

  std::span<double> node(std::size_t b, std::size_t j) noexcept {
    return {values_.data() + (b * nodes_ + j) * cells_, cells_};
  }
  std::span<const double> node(std::size_t b, std::size_t j) const noexcept {
    return {values_.data() + (b * nodes_ + j) * cells_, cells_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const CellBank& other) const noexcept {
    return batch_ == other.batch_ && nodes_ == other.nodes_ && cells_ == other.cells_;
  }

  friend bool operator==(const CellBank&, const CellBank&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t nodes_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> values_;
};

}  // namespace mlstm
