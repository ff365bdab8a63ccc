// Copyright 2026 The convgen Authors
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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace convgen {

/// Seeded random source. Wraps std::mt19937_64, whose output sequence is
/// fixed by the standard, and implements every derived distribution itself
/// (the standard distributions are implementation-defined), so a seed gives
/// the same stream on every platform.
///
/// Not thread-safe; each worker owns its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for item `stream` under `seed`, e.g. one per
  /// conversation index.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// True with probability p (p <= 0 never, p >= 1 always). Always consumes
  /// one draw so that streams stay aligned across different p.
  bool bernoulli(double p);

  /// Fisher-Yates shuffle of indices.
  void shuffle(std::span<std::size_t> values);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used for seed derivation and cheap hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace convgen
