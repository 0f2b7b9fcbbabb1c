// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "reference_lstm.hpp"

#include <algorithm>
#include <cmath>

namespace mlstm::testing {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Step {
  std::vector<double> x, h_prev, c_prev, a, i, f, o, c, h;
};

struct Gate {
  const RealMatrix& w;
  const RealMatrix& u;
  const RealVector& b;
};

double pre_activation(const Gate& g, std::size_t j, const std::vector<double>& x, const std::vector<double>& h) {
  double z = g.b[j];
  for (std::size_t k = 0; k < x.size(); ++k) z += g.w(j, k) * x[k];
  for (std::size_t k = 0; k < h.size(); ++k) z += g.u(j, k) * h[k];
  return z;
}

void accumulate_gate(RealMatrix& dw, RealMatrix& du, RealVector& db, std::size_t j, double dz,
                     const std::vector<double>& x, const std::vector<double>& h) {
  for (std::size_t k = 0; k < x.size(); ++k) dw(j, k) += dz * x[k];
  for (std::size_t k = 0; k < h.size(); ++k) du(j, k) += dz * h[k];
  db[j] += dz;
}

}  // namespace

std::vector<ReferenceLayerState> reference_state_from(const ModelState& state) {
  std::vector<ReferenceLayerState> out;
  for (const LayerState& layer : state.layers) {
    ReferenceLayerState ref;
    const std::size_t batch = layer.cells.batch();
    const std::size_t nodes = layer.cells.nodes();
    ref.h.assign(batch, std::vector<double>(nodes, 0.0));
    ref.c.assign(batch, std::vector<double>(nodes, 0.0));
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < nodes; ++j) {
        ref.h[b][j] = layer.h(b, j);
        ref.c[b][j] = layer.cells.node(b, j)[0];
      }
    }
    out.push_back(std::move(ref));
  }
  return out;
}

ReferenceResult reference_window(const ModelParams& params, const std::vector<ReferenceLayerState>& initial,
                                 const TokenGrid& inputs, const TokenGrid& targets) {
  const std::size_t steps = inputs.steps;
  const std::size_t batch = inputs.batch;
  const std::size_t layers = params.layers.size();
  const std::size_t vocab = params.out_bias.size();
  const std::size_t embed = params.embedding.cols();
  const double scale = 1.0 / static_cast<double>(steps * batch);

  ReferenceResult result;
  result.h.assign(steps, std::vector<std::vector<double>>(layers));
  result.probs.assign(steps, std::vector<std::vector<double>>(batch));
  result.final_state = initial;

  // trace[b][t][l]
  std::vector<std::vector<std::vector<Step>>> trace(batch, std::vector<std::vector<Step>>(steps, std::vector<Step>(layers)));
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<std::vector<double>> h(layers), c(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      h[l] = initial[l].h[b];
      c[l] = initial[l].c[b];
    }
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> x(embed);
      for (std::size_t k = 0; k < embed; ++k) x[k] = params.embedding(inputs.at(t, b), k);
      for (std::size_t l = 0; l < layers; ++l) {
        const LayerParams& p = params.layers[l];
        const std::size_t n = p.b_c.size();
        Step& s = trace[b][t][l];
        s.x = x;
        s.h_prev = h[l];
        s.c_prev = c[l];
        s.a.resize(n), s.i.resize(n), s.f.resize(n), s.o.resize(n), s.c.resize(n), s.h.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
          s.a[j] = std::tanh(pre_activation({p.w_c, p.u_c, p.b_c}, j, s.x, s.h_prev));
          s.i[j] = logistic(pre_activation({p.w_i, p.u_i, p.b_i}, j, s.x, s.h_prev));
          s.f[j] = logistic(pre_activation({p.w_f, p.u_f, p.b_f}, j, s.x, s.h_prev));
          s.o[j] = logistic(pre_activation({p.w_o, p.u_o, p.b_o}, j, s.x, s.h_prev));
          s.c[j] = s.i[j] * s.a[j] + s.f[j] * s.c_prev[j];
          s.h[j] = s.o[j] * std::tanh(s.c[j]);
        }
        h[l] = s.h;
        c[l] = s.c;
        x = s.h;
        result.h[t][l].insert(result.h[t][l].end(), s.h.begin(), s.h.end());
      }
      std::vector<double> logits(vocab);
      for (std::size_t v = 0; v < vocab; ++v) {
        double z = params.out_bias[v];
        for (std::size_t k = 0; k < x.size(); ++k) z += params.out_proj(v, k) * x[k];
        logits[v] = z;
      }
      const double top = *std::max_element(logits.begin(), logits.end());
      double total = 0.0;
      for (double& z : logits) total += (z = std::exp(z - top));
      for (double& z : logits) z /= total;
      result.loss -= std::log(logits[targets.at(t, b)]) * scale;
      result.probs[t][b] = std::move(logits);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      result.final_state[l].h[b] = h[l];
      result.final_state[l].c[b] = c[l];
    }
  }

  // Backward, one stream at a time; streams are independent given params.
  ModelConfig shape;
  shape.vocab_size = vocab;
  shape.embed_dim = embed;
  shape.hidden_dim = params.layers.front().b_c.size();
  shape.num_layers = layers;
  shape.cells = 1;
  result.grads = ModelParams::zeros(shape);
  ModelParams& g = result.grads;
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<std::vector<double>> dh_next(layers), dc_next(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      dh_next[l].assign(params.layers[l].b_c.size(), 0.0);
      dc_next[l].assign(params.layers[l].b_c.size(), 0.0);
    }
    for (std::size_t t = steps; t-- > 0;) {
      const std::vector<double>& top_h = trace[b][t][layers - 1].h;
      std::vector<double> dx(top_h.size(), 0.0);
      for (std::size_t v = 0; v < vocab; ++v) {
        const double dz = (result.probs[t][b][v] - (v == targets.at(t, b) ? 1.0 : 0.0)) * scale;
        g.out_bias[v] += dz;
        for (std::size_t k = 0; k < top_h.size(); ++k) {
          g.out_proj(v, k) += dz * top_h[k];
          dx[k] += dz * params.out_proj(v, k);
        }
      }
      for (std::size_t l = layers; l-- > 0;) {
        const LayerParams& p = params.layers[l];
        LayerParams& gp = g.layers[l];
        const Step& s = trace[b][t][l];
        const std::size_t n = s.h.size();
        std::vector<double> dh_prev(n, 0.0), dc_prev(n, 0.0), dx_below(s.x.size(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          const double dh = dx[j] + dh_next[l][j];
          const double tc = std::tanh(s.c[j]);
          const double d_o = dh * tc;
          const double dc = dh * s.o[j] * (1.0 - tc * tc) + dc_next[l][j];
          const double dza = dc * s.i[j] * (1.0 - s.a[j] * s.a[j]);
          const double dzi = dc * s.a[j] * s.i[j] * (1.0 - s.i[j]);
          const double dzf = dc * s.c_prev[j] * s.f[j] * (1.0 - s.f[j]);
          const double dzo = d_o * s.o[j] * (1.0 - s.o[j]);
          dc_prev[j] = dc * s.f[j];
          accumulate_gate(gp.w_c, gp.u_c, gp.b_c, j, dza, s.x, s.h_prev);
          accumulate_gate(gp.w_i, gp.u_i, gp.b_i, j, dzi, s.x, s.h_prev);
          accumulate_gate(gp.w_f, gp.u_f, gp.b_f, j, dzf, s.x, s.h_prev);
          accumulate_gate(gp.w_o, gp.u_o, gp.b_o, j, dzo, s.x, s.h_prev);
          for (std::size_t k = 0; k < s.x.size(); ++k) {
            dx_below[k] += dza * p.w_c(j, k) + dzi * p.w_i(j, k) + dzf * p.w_f(j, k) + dzo * p.w_o(j, k);
          }
          for (std::size_t k = 0; k < n; ++k) {
            dh_prev[k] += dza * p.u_c(j, k) + dzi * p.u_i(j, k) + dzf * p.u_f(j, k) + dzo * p.u_o(j, k);
          }
        }
        dh_next[l] = std::move(dh_prev);
        dc_next[l] = std::move(dc_prev);
        dx = std::move(dx_below);
      }
      const TokenId token = inputs.at(t, b);
      for (std::size_t k = 0; k < embed; ++k) g.embedding(token, k) += dx[k];
    }
  }
  return result;
}

}  // namespace mlstm::testing
