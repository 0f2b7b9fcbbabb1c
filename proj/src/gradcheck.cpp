// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <type_traits>
#include <utility>

#include "mlstm/numerics/rng.hpp"

namespace mlstm {

namespace {

constexpr SelectionKind kAllKinds[] = {
    SelectionKind::simple_mean,    SelectionKind::weighted_sum,    SelectionKind::random_selection,
    SelectionKind::max_pooling,    SelectionKind::min_max_pooling, SelectionKind::learnable_weights,
};

// Collects spans in for_each_tensor order so analytic and parameter tensors
// can be walked in lockstep.
template <class Params>
auto tensor_spans(Params& p) {
  using Span = std::conditional_t<std::is_const_v<Params>, std::span<const double>, std::span<double>>;
  std::vector<std::pair<std::string, Span>> out;
  for_each_tensor(p, [&](const std::string& name, Span values) { out.emplace_back(name, values); });
  return out;
}

}  // namespace

ModelConfig gradcheck_model_config(SelectionKind kind, const GradcheckOptions& options) {
  ModelConfig config;
  config.vocab_size = options.vocab_size;
  config.embed_dim = options.embed_dim;
  config.hidden_dim = options.hidden_dim;
  config.num_layers = options.num_layers;
  config.cells = options.cells;
  config.strategy = kind;
  config.dropout_rate = 0.0;
  config.init_scale = options.init_scale;
  config.cell_init = CellInit::jitter;
  config.seed = options.seed;
  return config;
}

double gradcheck_relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-5});
  return std::abs(analytic - numeric) / denom;
}

namespace {

struct GradcheckSetup {
  InitializedModel model;
  TokenGrid inputs;
  TokenGrid targets;
  std::uint64_t selection_seed = 0;
};

GradcheckSetup draw_setup(const ModelConfig& config, const GradcheckOptions& options, std::uint64_t seed) {
  SeededRng rng(seed);
  GradcheckSetup setup{init_model(config, options.batch, rng), TokenGrid(options.unroll, options.batch),
                       TokenGrid(options.unroll, options.batch), 0};
  // Unit cell weights make every learnable_weights product a plain max;
  // spread them so the weights themselves matter.
  for (auto& layer : setup.model.params.layers) {
    for (double& w : layer.cell_weights.values()) w = rng.uniform(0.5, 1.5);
  }
  for (auto& id : setup.inputs.ids) id = static_cast<TokenId>(rng.uniform_index(config.vocab_size));
  for (auto& id : setup.targets.ids) id = static_cast<TokenId>(rng.uniform_index(config.vocab_size));
  setup.selection_seed = rng.next_u64();
  return setup;
}

// Closest approach to a tie among the decisions a parameter probe can flip.
// Cells of one node share i, a and f > 0, so their order (and with it the
// max_pooling winner and both min_max_pooling candidates) never changes;
// what can flip is the min_max_pooling branch (|o - o_thr|) and the
// learnable_weights winner (gap between the two best weighted cells).
double selection_margin(const ModelConfig& config, const ModelParams& params, const WindowCache& cache) {
  double margin = std::numeric_limits<double>::infinity();
  const SelectionKind kind = config.strategy;
  std::vector<double> scores(config.cells);
  for (const StepTrace& step : cache.steps) {
    for (std::size_t l = 0; l < step.layers.size(); ++l) {
      const StepCache& c = step.layers[l];
      for (std::size_t b = 0; b < c.cells_prev.batch(); ++b) {
        for (std::size_t j = 0; j < c.cells_prev.nodes(); ++j) {
          if (kind == SelectionKind::min_max_pooling) {
            margin = std::min(margin, std::abs(c.o(b, j) - config.output_threshold));
          }
          if (kind != SelectionKind::learnable_weights || scores.size() < 2) continue;
          const std::span<const double> prev = c.cells_prev.node(b, j);
          for (std::size_t k = 0; k < config.cells; ++k) {
            const double cell = c.i(b, j) * c.a(b, j) + c.f(b, j) * prev[k];
            scores[k] = cell * params.layers[l].cell_weights(j, k);
          }
          std::partial_sort(scores.begin(), scores.begin() + 2, scores.end(), std::greater<>{});
          margin = std::min(margin, scores[0] - scores[1]);
        }
      }
    }
  }
  return margin;
}

}  // namespace

GradcheckResult run_gradcheck(SelectionKind kind, const GradcheckOptions& options) {
  const ModelConfig config = gradcheck_model_config(kind, options);
  config.validate();

  GradcheckResult result;
  result.kind = kind;
  GradcheckSetup setup;
  WindowOutput reference;
  // Draws are repeated with derived seeds until no selection decision sits
  // within min_selection_margin of a tie, where the loss has a kink and
  // central differences are meaningless.
  for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? options.seed : derive_seed(options.seed, attempt);
    setup = draw_setup(config, options, seed);
    SeededRng replay(setup.selection_seed);
    reference = forward_window(setup.model.params, config, setup.model.state, setup.inputs, true, replay);
    result.attempts = attempt + 1;
    result.selection_margin = selection_margin(config, setup.model.params, reference.cache);
    if (result.selection_margin >= options.min_selection_margin) break;
  }

  ModelParams& params = setup.model.params;
  auto loss_at = [&](const ModelParams& p) {
    SeededRng replay(setup.selection_seed);
    const WindowOutput out = forward_window(p, config, setup.model.state, setup.inputs, true, replay);
    return loss_window(out.cache.probs, setup.targets);
  };
  const ModelParams analytic = backward_window(params, config, reference.cache, setup.targets);

  auto param_spans = tensor_spans(params);
  const auto grad_spans = tensor_spans(analytic);
  for (std::size_t t = 0; t < param_spans.size(); ++t) {
    GradcheckGroup group{param_spans[t].first, 0, 0.0};
    std::span<double> values = param_spans[t].second;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + options.step;
      const double plus = loss_at(params);
      values[k] = saved - options.step;
      const double minus = loss_at(params);
      values[k] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      group.max_relative_error =
          std::max(group.max_relative_error, gradcheck_relative_error(grad_spans[t].second[k], numeric));
      ++group.checked;
    }
    result.max_relative_error = std::max(result.max_relative_error, group.max_relative_error);
    result.groups.push_back(std::move(group));
  }
  result.passed = std::isfinite(result.max_relative_error) && result.max_relative_error <= options.tolerance;
  return result;
}

std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options) {
  std::vector<GradcheckResult> results;
  for (SelectionKind kind : kAllKinds) results.push_back(run_gradcheck(kind, options));
  return results;
}

void print_gradcheck(std::ostream& out, const GradcheckResult& result, double tolerance) {
  char line[200];
  for (const GradcheckGroup& g : result.groups) {
    std::snprintf(line, sizeof line, "%s %s checked=%zu max_rel_err=%.3e %s\n",
                  std::string(to_string(result.kind)).c_str(), g.name.c_str(), g.checked,
                  g.max_relative_error, g.max_relative_error <= tolerance ? "ok" : "FAIL");
    out << line;
  }
  std::snprintf(line, sizeof line, "%s max_rel_err=%.3e tol=%.0e %s", std::string(to_string(result.kind)).c_str(),
                result.max_relative_error, tolerance, result.passed ? "PASS" : "FAIL");
  out << line;
  if (std::isfinite(result.selection_margin)) {
    std::snprintf(line, sizeof line, " selection_margin=%.3e draws=%zu", result.selection_margin, result.attempts);
    out << line;
  }
  out << '\n';
}

}  // namespace mlstm
