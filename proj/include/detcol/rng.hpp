// Copyright 2026 The detcol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace detcol {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Independent generator for the sample at `index` of an ensemble with the
/// given master seed. Streams are decorrelated by splitmix64 mixing, so any
/// execution order (or parallel schedule) reproduces the same draws.
inline std::mt19937_64 make_sample_rng(std::uint64_t seed,
                                       std::uint64_t index) {
  std::uint64_t s = seed ^ ((index + 1) * 0x9E3779B97F4A7C15ull);
  return std::mt19937_64(splitmix64(s));
}

/// Uniform double in [0, 1) with 53 random bits. Bit-reproducible for a
/// given generator state, unlike std::uniform_real_distribution.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detcol
