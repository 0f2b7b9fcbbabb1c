// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

// AArch64 NEON kernels (two doubles per register). NEON is part of the
// AArch64 baseline, so no runtime probe is needed.

#include <arm_neon.h>

#include "mlstm/numerics/kernels.hpp"

namespace mlstm::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + k + 4), vld1q_f64(b + k + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + k + 6), vld1q_f64(b + k + 6));
  }
  for (; k + 2 <= n; k += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
  acc0 = vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3));
  double sum = vaddvq_f64(acc0);
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(y + k, vfmaq_f64(vld1q_f64(y + k), va, vld1q_f64(x + k)));
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void scale(double alpha, double* x, std::size_t n) noexcept {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(x + k, vmulq_f64(va, vld1q_f64(x + k)));
  for (; k < n; ++k) x[k] *= alpha;
}

}  // namespace mlstm::kernels::neon
