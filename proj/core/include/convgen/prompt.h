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

// Few-shot demonstration templates.
//
// Every demonstration block has the same surface form:
//
//   Title: <title>
//   Passage: <passage text, single line, truncated to the char budget>
//   Q1: <query>
//   Q2: <query>
//
// and blocks are separated by one blank line. The "full" template shows,
// per example conversation, the passage of its LAST turn followed by all of
// its queries; the "first turn" template shows the first passage and only
// the first query. A rendered prompt appends one more block for the target
// passage, the queries asked so far, and an open "Q<t+1>:" cue.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "convgen/corpus.h"

namespace convgen {

inline constexpr std::size_t kDefaultPassageCharBudget = 1200;
inline constexpr std::size_t kMaxFewShotExamples = 16;

struct ExampleTurn {
  std::string query;
  Passage passage;
};

/// One annotated demonstration conversation, turns in asked order.
struct ExampleConversation {
  std::vector<ExampleTurn> turns;
};

/// 1..16 demonstration conversations.
struct FewShotSet {
  std::vector<ExampleConversation> examples;

  /// Throws ValidationError unless 1 <= size <= 16 and every example has at
  /// least one turn with a nonempty query.
  void validate() const;
};

/// Loads examples from JSONL: one conversation per line,
/// {"turns": [{"query": ..., "passage": {"id", "doc_id", "title", "text"}}]}.
/// A turn may instead carry "passage_id", resolved against `corpus` when one
/// is given.
FewShotSet load_few_shot(const std::filesystem::path& path,
                         const Corpus* corpus = nullptr);

enum class TemplateKind { kFull, kFirstTurn };

std::string_view to_string(TemplateKind kind);

class Template {
 public:
  Template(TemplateKind kind, std::string text, std::size_t demo_count,
           std::size_t passage_char_budget);

  TemplateKind kind() const { return kind_; }
  /// Demonstration text, ending in a newline.
  const std::string& text() const { return text_; }
  std::size_t demo_count() const { return demo_count_; }
  std::size_t passage_char_budget() const { return passage_char_budget_; }

  /// FNV-1a of kind and text, hex encoded.
  std::string fingerprint() const;

  /// Writes the exact template bytes (sidecar for auditing).
  void save(const std::filesystem::path& path) const;
  /// Reads a sidecar written by save(); the block count is recovered from
  /// the text.
  static Template load(const std::filesystem::path& path, TemplateKind kind,
                       std::size_t passage_char_budget = kDefaultPassageCharBudget);

 private:
  TemplateKind kind_;
  std::string text_;
  std::size_t demo_count_;
  std::size_t passage_char_budget_;
};

Template build_full_template(
    const FewShotSet& examples,
    std::size_t passage_char_budget = kDefaultPassageCharBudget);

Template build_first_turn_template(
    const FewShotSet& examples,
    std::size_t passage_char_budget = kDefaultPassageCharBudget);

/// Demonstration text + target block + prior queries + "Q<t+1>:" cue.
/// A first-turn template only accepts an empty history.
std::string render_prompt(const Template& tmpl, const Passage& target,
                          const std::vector<std::string>& prior_queries);

}  // namespace convgen
