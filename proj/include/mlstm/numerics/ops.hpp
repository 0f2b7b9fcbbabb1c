// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "mlstm/numerics/matrix.hpp"
#include "mlstm/numerics/rng.hpp"

namespace mlstm {

enum class Activation { sigmoid, tanh };

/// Probability floor used by cross_entropy().
inline constexpr double kProbabilityFloor = 1e-12;

/// W x + U h + b.
RealVector affine(const RealMatrix& w, std::span<const double> x, const RealMatrix& u,
                  std::span<const double> h, std::span<const double> b);

/// Batched affine map: out[b] = W x[b] + U h[b] + bias, for every row b.
RealMatrix affine_batch(const RealMatrix& w, const RealMatrix& x, const RealMatrix& u,
                        const RealMatrix& h, std::span<const double> bias);

// Scalar activations. Both are evaluated without overflow for any finite
// input and clamped to the open codomain, so 0 < sigmoid < 1 and
// -1 < tanh < 1 hold exactly in floating point.
double sigmoid(double x) noexcept;
double tanh_activation(double x) noexcept;

RealVector apply_activation(std::span<const double> v, Activation kind);
void apply_activation_inplace(std::span<double> v, Activation kind) noexcept;

/// Max-subtracted softmax.
RealVector softmax(std::span<const double> logits);
void softmax_inplace(std::span<double> logits);

/// -ln(max(p[target], kProbabilityFloor)).
double cross_entropy(std::span<const double> probs, std::size_t target);

/// n draws from U[lo, hi).
RealVector uniform_sample(SeededRng& rng, double lo, double hi, std::size_t n);

// Batched products used by the layers. All accumulate into their output.
// Shapes: a [B x K], w [R x K], out / grad_out [B x R].

/// out += a * w^T
void matmul_nt_acc(RealMatrix& out, const RealMatrix& a, const RealMatrix& w);
/// grad_a += grad_out * w
void matmul_nn_acc(RealMatrix& grad_a, const RealMatrix& grad_out, const RealMatrix& w);
/// grad_w += grad_out^T * a
void matmul_tn_acc(RealMatrix& grad_w, const RealMatrix& grad_out, const RealMatrix& a);
/// grad_bias[r] += sum_b grad_out[b][r]
void column_sums_acc(std::span<double> grad_bias, const RealMatrix& grad_out);

/// Sum of squares of all entries (for global-norm computations).
double squared_norm(std::span<const double> v);

}  // namespace mlstm
