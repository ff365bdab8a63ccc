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

#include "convgen/degeneration.h"

#include <set>

#include "convgen/error.h"
#include "convgen/text.h"

namespace convgen {
namespace {

bool has_repeated_ngram(const std::vector<std::string>& tokens, std::size_t n) {
  if (n == 0 || tokens.size() < n) return false;
  std::set<std::vector<std::string>> seen;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    bool uniform = true;
    for (const auto& t : gram) uniform = uniform && t == gram.front();
    if (uniform) return true;
    if (!seen.insert(std::move(gram)).second) return true;
  }
  return false;
}

bool is_artifact_line(std::string_view line) {
  line = text::trim(line);
  if (text::starts_with(line, "Passage:")) return true;
  if (line.size() < 3 || line[0] != 'Q') return false;
  std::size_t i = 1;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  return i > 1 && i < line.size() && line[i] == ':';
}

bool has_artifact(std::string_view candidate) {
  std::size_t pos = 0;
  while (pos <= candidate.size()) {
    std::size_t nl = candidate.find('\n', pos);
    if (nl == std::string_view::npos) nl = candidate.size();
    if (is_artifact_line(candidate.substr(pos, nl - pos))) return true;
    pos = nl + 1;
  }
  return false;
}

}  // namespace

void DegenerationRules::validate() const {
  if (min_tokens < 0 || max_tokens < min_tokens) {
    throw ValidationError("degeneration token bounds must satisfy 0 <= min <= max");
  }
  if (repeat_ngram < 1) throw ValidationError("degeneration.repeat_ngram must be >= 1");
  if (!(near_duplicate_jaccard > 0.0 && near_duplicate_jaccard <= 1.0)) {
    throw ValidationError("degeneration.near_duplicate_jaccard must be in (0, 1]");
  }
}

std::string_view to_string(Degeneration d) {
  switch (d) {
    case Degeneration::kNone:
      return "none";
    case Degeneration::kTooShort:
      return "too-short";
    case Degeneration::kTooLong:
      return "too-long";
    case Degeneration::kRepeatedNgram:
      return "repeated-ngram";
    case Degeneration::kDuplicate:
      return "duplicate";
    case Degeneration::kNearDuplicate:
      return "near-duplicate";
    case Degeneration::kFormatArtifact:
      return "format-artifact";
  }
  return "unknown";
}

Degeneration classify_degeneration(std::string_view candidate,
                                   const std::vector<std::string>& prior_queries,
                                   const DegenerationRules& rules) {
  const auto tokens = text::word_tokens(candidate);
  const auto count = static_cast<int>(tokens.size());
  if (count < rules.min_tokens) return Degeneration::kTooShort;
  if (count > rules.max_tokens) return Degeneration::kTooLong;
  if (has_repeated_ngram(tokens, static_cast<std::size_t>(rules.repeat_ngram))) {
    return Degeneration::kRepeatedNgram;
  }
  const std::string folded = text::to_lower(text::trim(candidate));
  for (const auto& prior : prior_queries) {
    if (folded == text::to_lower(text::trim(prior))) return Degeneration::kDuplicate;
  }
  for (const auto& prior : prior_queries) {
    if (text::jaccard(tokens, text::word_tokens(prior)) >=
        rules.near_duplicate_jaccard) {
      return Degeneration::kNearDuplicate;
    }
  }
  if (has_artifact(candidate)) return Degeneration::kFormatArtifact;
  return Degeneration::kNone;
}

}  // namespace convgen
