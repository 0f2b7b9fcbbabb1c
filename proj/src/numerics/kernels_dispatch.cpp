// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "mlstm/error.hpp"
#include "mlstm/numerics/kernels.hpp"

namespace mlstm::kernels {

namespace {

struct KernelTable {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  void (*scale)(double, double*, std::size_t) noexcept;
};

constexpr KernelTable kScalarTable{Isa::scalar, &scalar::dot, &scalar::axpy, &scalar::scale};
#if defined(MLSTM_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::avx2, &avx2::dot, &avx2::axpy, &avx2::scale};
#endif
#if defined(MLSTM_HAVE_NEON)
constexpr KernelTable kNeonTable{Isa::neon, &neon::dot, &neon::axpy, &neon::scale};
#endif

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
#if defined(MLSTM_HAVE_AVX2)
    case Isa::avx2:
      return &kAvx2Table;
#endif
#if defined(MLSTM_HAVE_NEON)
    case Isa::neon:
      return &kNeonTable;
#endif
    default:
      return &kScalarTable;
  }
}

Isa best_supported() noexcept {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("MLSTM_ISA"); env != nullptr && *env != '\0') {
    const Isa requested = parse_isa(env);
    if (isa_supported(requested)) return table_for(requested);
  }
  return table_for(best_supported());
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  fail(ErrorKind::invalid_argument, "unknown ISA '" + std::string(name) + "'");
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(MLSTM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(MLSTM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed)->isa; }

void set_active_isa(Isa isa) {
  require(isa_supported(isa), ErrorKind::invalid_argument,
          "ISA '" + std::string(isa_name(isa)) + "' is not supported on this CPU/build");
  current().store(table_for(isa), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::shape, "dot: length mismatch");
  return current().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), ErrorKind::shape, "axpy: length mismatch");
  current().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) {
  current().load(std::memory_order_relaxed)->scale(alpha, x.data(), x.size());
}

}  // namespace mlstm::kernels
