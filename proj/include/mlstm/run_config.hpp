// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Run configuration: a preset expanded into model and training settings,
// then overridden key by key from a config file and command-line flags.
// Config-file keys are the flag names without the leading dashes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mlstm/language_model.hpp"
#include "mlstm/training.hpp"

namespace CLI {
class App;
}

namespace mlstm {

enum class Preset { small, medium, large, custom };

std::string_view to_string(Preset preset) noexcept;
Preset parse_preset(std::string_view name);

struct RunConfig {
  Preset preset = Preset::small;
  ModelConfig model;  // vocab_size is filled in once the corpus is read
  TrainConfig train;
  std::filesystem::path train_path;
  std::filesystem::path valid_path;
  std::filesystem::path test_path;
  std::filesystem::path checkpoint_path;
};

/// small: 200 units, dropout 0.4, lr 1, init 0.1, clip 5, 39 epochs.
/// medium: 650 units, dropout 0.5, lr 1.2, init 0.05, clip 5, 55 epochs.
/// large: 1500 units, dropout 0.65, lr 1.2, init 0.05, clip 10, 55 epochs.
/// All: 2 layers, embed = hidden, unroll 35, batch 20, m = 10, max_pooling.
/// custom starts from the small values.
RunConfig preset_config(Preset preset);

/// Explicitly supplied settings; anything left empty keeps the preset value.
struct RunOverrides {
  std::optional<std::string> preset;
  std::optional<std::size_t> embed_dim, hidden_dim, num_layers, cells;
  std::optional<std::string> strategy, cell_init;
  std::optional<double> output_threshold, dropout_rate, init_scale, jitter_scale;
  std::optional<double> initial_lr, lr_decay, min_reduction, min_lr, clip_norm;
  std::optional<std::size_t> epochs_to_wait, batch_size, unroll, max_epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> train_path, valid_path, test_path, checkpoint_path;
  std::optional<std::string> config_path;
};

/// Registers every run-configuration flag plus --config on `app`.
void add_run_options(CLI::App& app, RunOverrides& overrides);

/// Keys of the config file at `path`. Throws Error(io) for a missing or
/// unreadable file and Error(config) for unknown keys or invalid values.
RunOverrides read_config_file(const std::filesystem::path& path);

/// Fields set in `top` replace those in `base`.
RunOverrides merge_overrides(RunOverrides base, const RunOverrides& top);

/// Reads config_path (if set) beneath the explicit overrides, expands the
/// preset, applies the overrides and validates the model and training
/// fields (vocab_size excluded). Throws Error(config) or Error(io).
RunConfig resolve_run_config(const RunOverrides& overrides);

/// resolve_run_config of a config file alone.
RunConfig parse_config(const std::filesystem::path& path);

/// One "key = value" line per setting, in a fixed order; also a valid
/// config file.
std::string format_run_config(const RunConfig& config);

}  // namespace mlstm
