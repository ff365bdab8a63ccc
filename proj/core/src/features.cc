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

#include "convgen/features.h"

#include <cmath>
#include <map>

#include "convgen/text.h"

namespace convgen {

std::uint32_t feature_index(std::string_view token) {
  return text::fnv1a32(token) & static_cast<std::uint32_t>(kFeatureDim - 1);
}

FeatureVector featurize(std::string_view input) {
  const auto tokens = text::word_tokens(input);
  FeatureVector fv;
  if (tokens.empty()) return fv;

  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) counts[feature_index(t)] += 1.0;

  const double scale = 1.0 / std::sqrt(static_cast<double>(tokens.size()));
  fv.indices.reserve(counts.size());
  fv.values.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [idx, c] : counts) {
    fv.indices.push_back(idx);
    fv.values.push_back(c * scale);
    sq += (c * scale) * (c * scale);
  }
  fv.norm = std::sqrt(sq);
  return fv;
}

}  // namespace convgen
