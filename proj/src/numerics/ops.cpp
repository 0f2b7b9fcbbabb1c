// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlstm/error.hpp"
#include "mlstm/numerics/kernels.hpp"

namespace mlstm {

namespace {

constexpr double kBelowOne = 1.0 - 0x1.0p-53;  // nextafter(1.0, 0.0)
constexpr double kSmallestPositive = std::numeric_limits<double>::min();

}  // namespace

void RealMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

RealVector affine(const RealMatrix& w, std::span<const double> x, const RealMatrix& u,
                  std::span<const double> h, std::span<const double> b) {
  require(w.cols() == x.size() && u.cols() == h.size() && w.rows() == u.rows() &&
              w.rows() == b.size(),
          ErrorKind::shape, "affine: dimension mismatch");
  RealVector out(b.begin(), b.end());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    out[r] += kernels::dot(w.row(r), x) + kernels::dot(u.row(r), h);
  }
  return out;
}

RealMatrix affine_batch(const RealMatrix& w, const RealMatrix& x, const RealMatrix& u,
                        const RealMatrix& h, std::span<const double> bias) {
  require(w.cols() == x.cols() && u.cols() == h.cols() && w.rows() == u.rows() &&
              w.rows() == bias.size() && x.rows() == h.rows(),
          ErrorKind::shape, "affine_batch: dimension mismatch");
  RealMatrix out(x.rows(), w.rows());
  for (std::size_t b = 0; b < out.rows(); ++b) std::copy(bias.begin(), bias.end(), out.row(b).begin());
  matmul_nt_acc(out, x, w);
  matmul_nt_acc(out, h, u);
  return out;
}

double sigmoid(double x) noexcept {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kSmallestPositive, kBelowOne);
}

double tanh_activation(double x) noexcept { return std::clamp(std::tanh(x), -kBelowOne, kBelowOne); }

void apply_activation_inplace(std::span<double> v, Activation kind) noexcept {
  if (kind == Activation::sigmoid) {
    for (double& x : v) x = sigmoid(x);
  } else {
    for (double& x : v) x = tanh_activation(x);
  }
}

RealVector apply_activation(std::span<const double> v, Activation kind) {
  RealVector out(v.begin(), v.end());
  apply_activation_inplace(out, kind);
  return out;
}

void softmax_inplace(std::span<double> logits) {
  require(!logits.empty(), ErrorKind::invalid_argument, "softmax: empty input");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - peak);
    total += z;
  }
  kernels::scale(1.0 / total, logits);
}

RealVector softmax(std::span<const double> logits) {
  RealVector out(logits.begin(), logits.end());
  softmax_inplace(out);
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t target) {
  require(target < probs.size(), ErrorKind::invalid_argument, "cross_entropy: target out of range");
  return -std::log(std::max(probs[target], kProbabilityFloor));
}

RealVector uniform_sample(SeededRng& rng, double lo, double hi, std::size_t n) {
  require(lo < hi, ErrorKind::invalid_argument, "uniform_sample: requires lo < hi");
  RealVector out(n);
  for (double& v : out) v = rng.uniform(lo, hi);
  return out;
}

void matmul_nt_acc(RealMatrix& out, const RealMatrix& a, const RealMatrix& w) {
  require(a.cols() == w.cols() && out.rows() == a.rows() && out.cols() == w.rows(),
          ErrorKind::shape, "matmul_nt_acc: dimension mismatch");
  // Row of w outermost: it stays hot in cache while every batch row uses it.
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto w_row = w.row(r);
    for (std::size_t b = 0; b < a.rows(); ++b) out(b, r) += kernels::dot(a.row(b), w_row);
  }
}

void matmul_nn_acc(RealMatrix& grad_a, const RealMatrix& grad_out, const RealMatrix& w) {
  require(grad_a.cols() == w.cols() && grad_out.rows() == grad_a.rows() &&
              grad_out.cols() == w.rows(),
          ErrorKind::shape, "matmul_nn_acc: dimension mismatch");
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto w_row = w.row(r);
    for (std::size_t b = 0; b < grad_a.rows(); ++b) {
      const double g = grad_out(b, r);
      if (g != 0.0) kernels::axpy(g, w_row, grad_a.row(b));
    }
  }
}

void matmul_tn_acc(RealMatrix& grad_w, const RealMatrix& grad_out, const RealMatrix& a) {
  require(grad_w.cols() == a.cols() && grad_out.rows() == a.rows() &&
              grad_out.cols() == grad_w.rows(),
          ErrorKind::shape, "matmul_tn_acc: dimension mismatch");
  for (std::size_t r = 0; r < grad_w.rows(); ++r) {
    auto g_row = grad_w.row(r);
    for (std::size_t b = 0; b < a.rows(); ++b) {
      const double g = grad_out(b, r);
      if (g != 0.0) kernels::axpy(g, a.row(b), g_row);
    }
  }
}

void column_sums_acc(std::span<double> grad_bias, const RealMatrix& grad_out) {
  require(grad_bias.size() == grad_out.cols(), ErrorKind::shape,
          "column_sums_acc: dimension mismatch");
  for (std::size_t b = 0; b < grad_out.rows(); ++b) {
    kernels::axpy(1.0, grad_out.row(b), grad_bias);
  }
}

double squared_norm(std::span<const double> v) { return kernels::dot(v, v); }

}  // namespace mlstm
