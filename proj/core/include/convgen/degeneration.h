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

#include <string>
#include <string_view>
#include <vector>

namespace convgen {

/// Thresholds for the degeneration check. Tokens are lowercased runs of
/// letters/digits.
struct DegenerationRules {
  int min_tokens = 3;
  int max_tokens = 64;
  int repeat_ngram = 4;
  double near_duplicate_jaccard = 0.8;

  void validate() const;
};

enum class Degeneration {
  kNone,
  kTooShort,        // fewer than min_tokens
  kTooLong,         // more than max_tokens
  kRepeatedNgram,   // an n-gram occurs twice, or is one token n times over
  kDuplicate,       // case-folded exact match of a prior query
  kNearDuplicate,   // token Jaccard >= threshold with a prior query
  kFormatArtifact,  // a line starting "Passage:" or "Q<digits>:"
};

std::string_view to_string(Degeneration d);

/// First rule the candidate violates, checked in the order listed above.
Degeneration classify_degeneration(std::string_view candidate,
                                   const std::vector<std::string>& prior_queries,
                                   const DegenerationRules& rules = {});

/// True when the candidate must be rejected.
inline bool is_degenerate(std::string_view candidate,
                          const std::vector<std::string>& prior_queries,
                          const DegenerationRules& rules = {}) {
  return classify_degeneration(candidate, prior_queries, rules) !=
         Degeneration::kNone;
}

}  // namespace convgen
