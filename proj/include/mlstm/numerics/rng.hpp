// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mlstm {

/// Seeded pseudo-random source used for every random draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Conversions to reals and bounded integers are done here rather
/// than with <random> distributions, whose algorithms are
/// implementation-defined. Together this makes every stream bit-identical
/// across platforms and standard libraries for a given seed.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n); unbiased (rejection sampling). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer applied to (seed, stream); used to derive
/// independent seeds for sub-streams (evaluation state, generation, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace mlstm
