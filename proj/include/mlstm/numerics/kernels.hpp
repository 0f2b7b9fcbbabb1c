// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Innermost double-precision loops used by every matrix product in the
// library. Each kernel has a portable scalar reference and optional SIMD
// variants; the process-wide table is chosen once at startup from the CPU
// feature set and can be overridden with MLSTM_ISA=scalar|avx2|neon.
//
// SIMD variants reassociate the reductions in dot(), so results may differ
// from the scalar path in the last few bits. For a fixed ISA every kernel
// is deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace mlstm::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;

/// Throws Error(invalid_argument) if the CPU cannot run `isa`.
void set_active_isa(Isa isa);

/// Parses "scalar" / "avx2" / "neon".
Isa parse_isa(std::string_view name);

double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// x *= alpha
void scale(double alpha, std::span<double> x);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void scale(double alpha, double* x, std::size_t n) noexcept;
}  // namespace scalar

#if defined(MLSTM_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void scale(double alpha, double* x, std::size_t n) noexcept;
}  // namespace avx2
#endif

#if defined(MLSTM_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void scale(double alpha, double* x, std::size_t n) noexcept;
}  // namespace neon
#endif

}  // namespace mlstm::kernels
