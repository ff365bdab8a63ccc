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

#include "convgen/mock_backend.h"

#include <array>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "convgen/rng.h"
#include "convgen/text.h"

namespace convgen {
namespace {

constexpr std::string_view kPassageTag = "Passage: ";
constexpr std::string_view kTitleTag = "Title: ";

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "about", "after", "also",  "among", "been",  "before", "being",
      "from",  "have",  "into",  "more",  "most",  "other",  "over",
      "some",  "such",  "than",  "that",  "their", "them",   "then",
      "there", "these", "they",  "this",  "those", "under",  "were",
      "what",  "when",  "where", "which", "while", "with",   "would"};
  return kWords;
}

struct Block {
  std::string title;
  std::string passage;
};

// Every "Title:/Passage:" block in prompt order; the last one is the target.
std::vector<Block> parse_blocks(std::string_view prompt) {
  std::vector<Block> blocks;
  std::size_t pos = 0;
  while (pos < prompt.size()) {
    std::size_t nl = prompt.find('\n', pos);
    if (nl == std::string_view::npos) nl = prompt.size();
    std::string_view line = prompt.substr(pos, nl - pos);
    if (text::starts_with(line, kTitleTag)) {
      blocks.push_back({std::string(line.substr(kTitleTag.size())), {}});
    } else if (text::starts_with(line, kPassageTag) && !blocks.empty()) {
      blocks.back().passage = std::string(line.substr(kPassageTag.size()));
    }
    pos = nl + 1;
  }
  return blocks;
}

// Number n of the trailing "Qn:" cue; 1 when absent.
int cue_number(std::string_view prompt) {
  const std::size_t q = prompt.rfind('Q');
  if (q == std::string_view::npos) return 1;
  int n = 0;
  for (std::size_t i = q + 1; i < prompt.size() && prompt[i] != ':'; ++i) {
    if (prompt[i] < '0' || prompt[i] > '9') return 1;
    n = n * 10 + (prompt[i] - '0');
  }
  return n > 0 ? n : 1;
}

std::vector<std::string> content_words(std::string_view passage) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& w : text::word_tokens(passage)) {
    if (w.size() < 4 || stopwords().count(w)) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  if (out.empty()) out.push_back("topic");
  return out;
}

constexpr std::array<std::string_view, 4> kFirstTurn = {
    "what is the {a} of {title}?",
    "what is {title} known for regarding {a}?",
    "how is {title} connected to {a} and {b}?",
    "what can you tell me about {title} and the {a}?",
};

constexpr std::array<std::string_view, 8> kFollowUp = {
    "what is known about the {a} {b}?",
    "when did the {a} {b} happen?",
    "who was involved in the {a}?",
    "how does the {a} relate to {b}?",
    "why is the {a} important?",
    "where is the {a} {b} located?",
    "what happened to the {a} after the {b}?",
    "what role did {a} play in {b}?",
};

std::string fill(std::string_view pattern, const std::string& title,
                 const std::string& a, const std::string& b) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      const std::string_view slot = pattern.substr(i + 1, close - i - 1);
      if (slot == "title") out += title;
      if (slot == "a") out += a;
      if (slot == "b") out += b;
      i = close;
    } else {
      out.push_back(pattern[i]);
    }
  }
  return out;
}

}  // namespace

MockBackend::MockBackend(MockBackendOptions options) : options_(options) {}

std::string MockBackend::name() const {
  return "mock:" + std::to_string(options_.seed);
}

std::string MockBackend::raw_complete(std::string_view prompt,
                                      const DecodingParams& /*params*/,
                                      std::uint64_t sample_seed) {
  Rng rng(mix64(text::fnv1a64(prompt) ^ mix64(options_.seed)) ^
          mix64(sample_seed + 1));
  const int turn = cue_number(prompt);
  const std::string next_cue = "\nQ" + std::to_string(turn + 1) + ":";

  const double roll = rng.uniform01();
  if (roll < options_.degenerate_rate) {
    // Half repetition loops, half leaked template lines.
    if (rng.bernoulli(0.5)) return " what what what what what is it" + next_cue;
    return " Passage: Q" + std::to_string(turn) + ": " + next_cue;
  }

  const auto blocks = parse_blocks(prompt);
  if (blocks.empty()) return " what is this about?" + next_cue;
  const Block* source = &blocks.back();
  if (blocks.size() > 1 && roll < options_.degenerate_rate + options_.off_topic_rate) {
    source = &blocks[rng.uniform_index(blocks.size() - 1)];
  }
  const auto words = content_words(source->passage);
  const std::string& a = words[rng.uniform_index(words.size())];
  const std::string& b = words[rng.uniform_index(words.size())];
  const std::string title =
      source->title.empty() ? std::string("it") : text::single_line(source->title);

  std::string query;
  if (turn <= 1) {
    query = fill(kFirstTurn[rng.uniform_index(kFirstTurn.size())], title, a, b);
  } else {
    query = fill(kFollowUp[rng.uniform_index(kFollowUp.size())], title, a, b);
  }
  return " " + query + next_cue;
}

}  // namespace convgen
