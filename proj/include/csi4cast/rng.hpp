// Copyright 2026 The csi4cast-workbench Authors
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

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace csi4cast {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream seed from a base seed and a stream tag.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL));
}

// Stream tags keep the random draws of separate concerns decoupled.
namespace stream {
inline constexpr std::uint64_t kPaths = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kNoiseDegree = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kDropout = 6;
inline constexpr std::uint64_t kSplit = 7;
inline constexpr std::uint64_t kProfileAngles = 8;
inline constexpr std::uint64_t kFreshNoise = 9;
}  // namespace stream

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream_tag) {
  return Engine(derive_seed(seed, stream_tag));
}

/// Uniform in [0, 1) from 53 random bits; stable across standard libraries.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

/// Standard normal via Box-Muller on uniform01, so draws are portable.
inline double standard_normal(Engine& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Circularly symmetric complex normal with E|z|^2 == variance.
inline std::complex<double> complex_normal(Engine& rng, double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return {s * re, s * im};
}

}  // namespace csi4cast
