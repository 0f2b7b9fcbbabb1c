// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/run_config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "mlstm/error.hpp"

namespace mlstm {

std::string_view to_string(Preset preset) noexcept {
  switch (preset) {
    case Preset::small: return "small";
    case Preset::medium: return "medium";
    case Preset::large: return "large";
    case Preset::custom: return "custom";
  }
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  for (Preset p : {Preset::small, Preset::medium, Preset::large, Preset::custom}) {
    if (name == to_string(p)) return p;
  }
  fail(ErrorKind::config, "unknown preset '" + std::string(name) + "' (expected small, medium, large or custom)");
}

RunConfig preset_config(Preset preset) {
  RunConfig rc;
  rc.preset = preset;
  ModelConfig& m = rc.model;
  TrainConfig& t = rc.train;
  m.num_layers = 2;
  m.cells = 10;
  m.strategy = SelectionKind::max_pooling;
  m.output_threshold = 0.5;
  m.cell_init = CellInit::jitter;
  t.unroll = 35;
  t.batch_size = 20;
  std::size_t units = 200;
  switch (preset) {
    case Preset::small:
    case Preset::custom:
      units = 200;
      m.dropout_rate = 0.4;
      m.init_scale = 0.1;
      t.initial_lr = 1.0;
      t.clip_norm = 5.0;
      t.max_epochs = 39;
      break;
    case Preset::medium:
      units = 650;
      m.dropout_rate = 0.5;
      m.init_scale = 0.05;
      t.initial_lr = 1.2;
      t.clip_norm = 5.0;
      t.max_epochs = 55;
      break;
    case Preset::large:
      units = 1500;
      m.dropout_rate = 0.65;
      m.init_scale = 0.05;
      t.initial_lr = 1.2;
      t.clip_norm = 10.0;
      t.max_epochs = 55;
      break;
  }
  m.hidden_dim = units;
  m.embed_dim = units;
  return rc;
}

namespace {

void add_setting_options(CLI::App& app, RunOverrides& o) {
  app.add_option("--preset", o.preset, "small | medium | large | custom");
  app.add_option("--embed_dim", o.embed_dim, "Embedding width (defaults to hidden_dim)");
  app.add_option("--hidden_dim", o.hidden_dim, "Nodes per layer");
  app.add_option("--num_layers", o.num_layers, "Stacked multi-cell layers");
  app.add_option("--cells,--m", o.cells, "Memory cells per node");
  app.add_option("--strategy", o.strategy, "Cell selection strategy");
  app.add_option("--o_thr", o.output_threshold, "Output-gate threshold for min_max_pooling");
  app.add_option("--dropout_rate", o.dropout_rate, "Dropout on non-recurrent connections");
  app.add_option("--init_scale", o.init_scale, "Uniform initialization half-width");
  app.add_option("--cell_init", o.cell_init, "zero | jitter");
  app.add_option("--jitter_scale", o.jitter_scale, "Half-width of jittered initial cells");
  app.add_option("--initial_lr,--lr", o.initial_lr, "Initial learning rate");
  app.add_option("--lr_decay", o.lr_decay, "Annealing factor");
  app.add_option("--epochs_to_wait", o.epochs_to_wait, "Chances before annealing");
  app.add_option("--min_reduction", o.min_reduction, "Required validation perplexity drop");
  app.add_option("--min_lr", o.min_lr, "Learning-rate floor");
  app.add_option("--clip_norm", o.clip_norm, "Global gradient norm threshold");
  app.add_option("--batch_size", o.batch_size, "Parallel streams");
  app.add_option("--unroll", o.unroll, "Timesteps per window");
  app.add_option("--max_epochs", o.max_epochs, "Training epochs");
  app.add_option("--seed", o.seed, "Seed for initialization and training");
  app.add_option("--train", o.train_path, "Training corpus");
  app.add_option("--valid", o.valid_path, "Validation corpus");
  app.add_option("--test", o.test_path, "Test corpus");
  app.add_option("--checkpoint", o.checkpoint_path, "Checkpoint path");
}

}  // namespace

void add_run_options(CLI::App& app, RunOverrides& o) {
  add_setting_options(app, o);
  app.add_option("--config", o.config_path, "Run configuration file (key = value lines); flags override it");
}

RunOverrides read_config_file(const std::filesystem::path& path) {
  std::error_code ec;
  require(std::filesystem::is_regular_file(path, ec), ErrorKind::io,
          "config file '" + path.string() + "' does not exist or is not a regular file");
  CLI::App app{"mlstm run configuration"};
  RunOverrides overrides;
  add_setting_options(app, overrides);
  app.set_config("--config");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::vector<std::string> args{path.string(), "--config"};  // CLI11 consumes the vector from the back
  try {
    app.parse(args);
  } catch (const CLI::FileError& e) {
    fail(ErrorKind::io, std::string("config file: ") + e.what());
  } catch (const CLI::ParseError& e) {
    fail(ErrorKind::config, "config file '" + path.string() + "': " + e.what());
  }
  return overrides;
}

RunOverrides merge_overrides(RunOverrides base, const RunOverrides& top) {
  auto take = [](auto& target, const auto& source) {
    if (source) target = source;
  };
  take(base.preset, top.preset);
  take(base.embed_dim, top.embed_dim);
  take(base.hidden_dim, top.hidden_dim);
  take(base.num_layers, top.num_layers);
  take(base.cells, top.cells);
  take(base.strategy, top.strategy);
  take(base.cell_init, top.cell_init);
  take(base.output_threshold, top.output_threshold);
  take(base.dropout_rate, top.dropout_rate);
  take(base.init_scale, top.init_scale);
  take(base.jitter_scale, top.jitter_scale);
  take(base.initial_lr, top.initial_lr);
  take(base.lr_decay, top.lr_decay);
  take(base.min_reduction, top.min_reduction);
  take(base.min_lr, top.min_lr);
  take(base.clip_norm, top.clip_norm);
  take(base.epochs_to_wait, top.epochs_to_wait);
  take(base.batch_size, top.batch_size);
  take(base.unroll, top.unroll);
  take(base.max_epochs, top.max_epochs);
  take(base.seed, top.seed);
  take(base.train_path, top.train_path);
  take(base.valid_path, top.valid_path);
  take(base.test_path, top.test_path);
  take(base.checkpoint_path, top.checkpoint_path);
  take(base.config_path, top.config_path);
  return base;
}

RunConfig resolve_run_config(const RunOverrides& explicit_overrides) {
  const RunOverrides o = explicit_overrides.config_path
                             ? merge_overrides(read_config_file(*explicit_overrides.config_path), explicit_overrides)
                             : explicit_overrides;
  RunConfig rc = preset_config(o.preset ? parse_preset(*o.preset) : Preset::small);
  ModelConfig& m = rc.model;
  TrainConfig& t = rc.train;
  auto apply = [](const auto& source, auto& target) {
    if (source) target = *source;
  };
  apply(o.hidden_dim, m.hidden_dim);
  m.embed_dim = o.embed_dim ? *o.embed_dim : m.hidden_dim;
  apply(o.num_layers, m.num_layers);
  apply(o.cells, m.cells);
  if (o.strategy) m.strategy = parse_selection_kind(*o.strategy);
  apply(o.output_threshold, m.output_threshold);
  apply(o.dropout_rate, m.dropout_rate);
  apply(o.init_scale, m.init_scale);
  if (o.cell_init) m.cell_init = parse_cell_init(*o.cell_init);
  apply(o.jitter_scale, m.jitter_scale);
  apply(o.initial_lr, t.initial_lr);
  apply(o.lr_decay, t.lr_decay);
  apply(o.epochs_to_wait, t.epochs_to_wait);
  apply(o.min_reduction, t.min_reduction);
  apply(o.min_lr, t.min_lr);
  apply(o.clip_norm, t.clip_norm);
  apply(o.batch_size, t.batch_size);
  apply(o.unroll, t.unroll);
  apply(o.max_epochs, t.max_epochs);
  if (o.seed) m.seed = t.seed = *o.seed;
  if (o.train_path) rc.train_path = *o.train_path;
  if (o.valid_path) rc.valid_path = *o.valid_path;
  if (o.test_path) rc.test_path = *o.test_path;
  if (o.checkpoint_path) rc.checkpoint_path = *o.checkpoint_path;

  ModelConfig probe = m;
  probe.vocab_size = 1;
  probe.validate();
  t.validate();
  return rc;
}

RunConfig parse_config(const std::filesystem::path& path) {
  RunOverrides overrides;
  overrides.config_path = path.string();
  return resolve_run_config(overrides);
}

std::string format_run_config(const RunConfig& rc) {
  const ModelConfig& m = rc.model;
  const TrainConfig& t = rc.train;
  std::ostringstream out;
  auto line = [&](const char* key, const auto& value) { out << key << " = " << value << '\n'; };
  auto real = [&](const char* key, double value) {
    // Shortest of %.15g / %.17g that reads back as the same double.
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.15g", value);
    if (std::strtod(buffer, nullptr) != value) std::snprintf(buffer, sizeof buffer, "%.17g", value);
    line(key, buffer);
  };
  auto quoted = [](const std::filesystem::path& p) { return '"' + p.string() + '"'; };
  line("preset", to_string(rc.preset));
  line("embed_dim", m.embed_dim);
  line("hidden_dim", m.hidden_dim);
  line("num_layers", m.num_layers);
  line("cells", m.cells);
  line("strategy", to_string(m.strategy));
  real("o_thr", m.output_threshold);
  real("dropout_rate", m.dropout_rate);
  real("init_scale", m.init_scale);
  line("cell_init", to_string(m.cell_init));
  real("jitter_scale", m.jitter_scale);
  real("initial_lr", t.initial_lr);
  real("lr_decay", t.lr_decay);
  line("epochs_to_wait", t.epochs_to_wait);
  real("min_reduction", t.min_reduction);
  real("min_lr", t.min_lr);
  real("clip_norm", t.clip_norm);
  line("batch_size", t.batch_size);
  line("unroll", t.unroll);
  line("max_epochs", t.max_epochs);
  line("seed", m.seed);
  if (!rc.train_path.empty()) line("train", quoted(rc.train_path));
  if (!rc.valid_path.empty()) line("valid", quoted(rc.valid_path));
  if (!rc.test_path.empty()) line("test", quoted(rc.test_path));
  if (!rc.checkpoint_path.empty()) line("checkpoint", quoted(rc.checkpoint_path));
  return out.str();
}

}  // namespace mlstm
