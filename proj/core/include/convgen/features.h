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
#include <string_view>
#include <vector>

namespace convgen {

inline constexpr std::uint32_t kFeatureBits = 15;
inline constexpr std::size_t kFeatureDim = std::size_t{1} << kFeatureBits;

/// Sparse hashed bag-of-words. Indices are strictly ascending and < 2^15.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  double norm = 0.0;  // L2 norm of values

  std::size_t nnz() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Hash bucket of one (already lowercased) token.
std::uint32_t feature_index(std::string_view token);

/// Lowercase, split on non-alphanumerics, hash each token into 2^15
/// buckets, count, and scale by 1/sqrt(token count). Empty text yields the
/// zero vector.
FeatureVector featurize(std::string_view text);

}  // namespace convgen
