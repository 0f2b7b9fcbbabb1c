// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/numerics/rng.hpp"

#include <cmath>
#include <limits>

#include "mlstm/error.hpp"

namespace mlstm {

double SeededRng::uniform(double lo, double hi) {
  const double value = lo + (hi - lo) * uniform();
  // lo + (hi - lo) * u can round up to hi when u is close to 1.
  return value < hi ? value : std::nextafter(hi, lo);
}

std::size_t SeededRng::uniform_index(std::size_t n) {
  require(n > 0, ErrorKind::invalid_argument, "uniform_index: empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mlstm
