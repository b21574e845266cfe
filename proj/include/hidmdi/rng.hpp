/**
 * Copyright 2026 the hidmdi authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "hidmdi/types.hpp"

namespace hidmdi {

// splitmix64 step; used to derive decorrelated per-worker seeds from one
// session seed so that parallel streams never overlap in practice.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Engine for worker `stream` of a run seeded with `seed`. Identical
// (seed, stream) always yields the identical sequence.
inline std::mt19937_64 make_stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xda3e39cb94b95bdbULL * (stream + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  const std::uint64_t c = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

// Draws one party's per-bin transmission phases under the configured model.
// Per-bin variances are chosen so the pairwise relative-phase variances per
// party come out as sigma^2 (space), |i-j| sigma^2 (time_white) and
// |i-j|^2 sigma^2 (time_drift).
inline void sample_phases(PhaseModel model, double sigma, std::span<double> out,
                          std::mt19937_64& rng) {
  const int n = static_cast<int>(out.size());
  if (sigma <= 0.0) {
    for (auto& p : out) p = 0.0;
    return;
  }
  std::normal_distribution<double> unit(0.0, 1.0);
  switch (model) {
    case PhaseModel::space_homogeneous: {
      const double s = sigma / std::sqrt(2.0);  // difference of two bins: sigma^2
      for (int i = 0; i < n; ++i) out[i] = s * unit(rng);
      return;
    }
    case PhaseModel::time_white: {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        out[i] = acc;
        acc += sigma * unit(rng);
      }
      return;
    }
    case PhaseModel::time_drift: {
      const double slope = sigma * unit(rng);
      for (int i = 0; i < n; ++i) out[i] = slope * static_cast<double>(i);
      return;
    }
  }
}

}  // namespace hidmdi
