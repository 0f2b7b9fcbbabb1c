// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels. Straight left-to-right loops; the SIMD variants are
// tested for agreement against these.

#include "mlstm/numerics/kernels.hpp"

namespace mlstm::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void scale(double alpha, double* x, std::size_t n) noexcept {
  for (std::size_t k = 0; k < n; ++k) x[k] *= alpha;
}

}  // namespace mlstm::kernels::scalar
