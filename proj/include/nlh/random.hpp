// Copyright 2026 The nlhdual Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "nlh/grid_field.hpp"

namespace nlh {

/// splitmix64-style combination of a base seed and a stream index.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Field with i.i.d. entries on the mask: uniform in [0, 1) when nonnegative,
/// otherwise uniform in [-1, 1). Zero outside the mask.
inline ScalarField random_field(const SupportMask& mask, std::mt19937_64& rng, bool nonnegative) {
  std::uniform_real_distribution<double> dist(nonnegative ? 0.0 : -1.0, 1.0);
  ScalarField f(mask.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask.contains(i)) f[i] = dist(rng);
  }
  return f;
}

}  // namespace nlh
