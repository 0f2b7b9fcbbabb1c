// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Checkpoint container (all integers little-endian):
//
//   offset 0   8 bytes   magic "MLSTMCKP"
//          8   u32       format version (kCheckpointVersion)
//         12   u64       header length H
//         20   H bytes   UTF-8 JSON: model config, train config, metadata,
//                        vocabulary (id order) and the tensor table
//                        (name + element count, in for_each_tensor order)
//       20+H   u64       total element count N
//       28+H   N x f64   parameter values, IEEE-754 binary64 little-endian,
//                        tensors concatenated in for_each_tensor order
//   28+H+8N    u32       CRC-32 (zlib polynomial) of every preceding byte
//
// Loading reports io (missing/unreadable), version_mismatch (known magic,
// other version) and corrupt (bad magic, truncation, checksum or schema
// failure) as distinct error kinds.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "mlstm/data.hpp"
#include "mlstm/language_model.hpp"
#include "mlstm/training.hpp"

namespace mlstm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::size_t epoch = 0;
  double valid_perplexity = std::numeric_limits<double>::quiet_NaN();
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  Vocabulary vocab;
  ModelParams params;
  CheckpointMeta meta;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

/// Writes via a temporary file and rename, so readers never observe a
/// partially written checkpoint.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mlstm
