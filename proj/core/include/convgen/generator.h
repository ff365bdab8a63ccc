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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "convgen/backend.h"
#include "convgen/corpus.h"
#include "convgen/degeneration.h"
#include "convgen/prompt.h"
#include "convgen/rng.h"

namespace convgen {

struct GenerationConfig {
  int turns_per_conversation = 7;
  double switch_probability = 0.3;
  /// Resamples allowed after a rejected candidate (attempts = 1 + this).
  int max_regeneration_attempts = 3;
  std::uint64_t seed = 0;
  DegenerationRules degeneration;

  void validate() const;
};

struct SyntheticTurn {
  std::string query;
  std::string passage_id;
  bool switched = false;

  friend bool operator==(const SyntheticTurn&, const SyntheticTurn&) = default;
};

struct SyntheticConversation {
  std::vector<SyntheticTurn> turns;
  std::uint64_t seed = 0;  // per-conversation stream seed
  std::string template_fingerprint;
  std::string backend;

  nlohmann::json to_json() const;
  static SyntheticConversation from_json(const nlohmann::json& j);
};

/// Reason codes for conversations that produce no output.
inline constexpr const char* kDiscardDegenerateFirstTurn = "degenerate-first-turn";

/// Outcome of one conversation slot.
struct ConversationOutcome {
  std::optional<SyntheticConversation> conversation;
  std::string discard_reason;  // set when conversation is empty
  int backend_calls = 0;
  int switches = 0;
  int switch_opportunities = 0;  // turns >= 2 where a switch was drawn
  bool truncated = false;        // a later turn exhausted its attempts
  std::map<std::string, int> rejections;  // by degeneration rule
};

/// With probability p returns (related passage, true), else (current,
/// false). A corpus of one passage never switches. Always draws exactly one
/// Bernoulli sample from `rng` before consulting the corpus.
std::pair<const Passage*, bool> switch_passage(const Passage& current,
                                               const Corpus& corpus,
                                               double probability, Rng& rng);

/// Observer for every prompt sent to the backend, in order.
using PromptObserver = std::function<void(int turn, const std::string& prompt)>;

/// Generates one conversation.
///
/// Turn 1 uses the first-turn template on a sampled passage; later turns use
/// the full template with every accepted query so far, after an optional
/// passage switch. Each candidate is degeneration-checked and resampled up
/// to max_regeneration_attempts times. If turn 1 never yields an accepted
/// query the conversation is discarded; if a later turn does, the
/// conversation ends there.
ConversationOutcome generate_conversation(const Corpus& corpus,
                                          const Template& first_turn,
                                          const Template& full,
                                          CompletionBackend& backend,
                                          const GenerationConfig& config,
                                          const DecodingParams& params,
                                          std::uint64_t conversation_index,
                                          const PromptObserver& observer = {});

struct GenerationReport {
  std::size_t requested = 0;  // conversation slots asked for
  std::size_t attempted = 0;  // slots actually run
  std::size_t emitted = 0;
  std::size_t turns = 0;
  std::size_t backend_calls = 0;
  std::size_t switches = 0;
  std::size_t switch_opportunities = 0;
  std::size_t truncated = 0;
  std::map<std::string, std::size_t> discards;
  std::map<std::string, std::size_t> rejections;
  bool aborted = false;
  std::string abort_reason;

  double switch_rate() const;
  double mean_turns() const;
  nlohmann::json to_json() const;
};

using ConversationSink = std::function<void(const SyntheticConversation&)>;

/// Runs `n_conversations` slots on `workers` threads and hands accepted
/// conversations to `sink` in slot order. Outputs depend only on the seed,
/// never on the worker count. A backend failure stops the run: everything
/// before the failing slot has already reached the sink, the report is
/// marked aborted, and the BackendError is rethrown after `on_abort` (if
/// set) has seen the report.
GenerationReport generate_dataset(
    const Corpus& corpus, const Template& first_turn, const Template& full,
    CompletionBackend& backend, const GenerationConfig& config,
    const DecodingParams& params, std::size_t n_conversations,
    const ConversationSink& sink, int workers = 1,
    const std::function<void(const GenerationReport&)>& on_abort = {});

}  // namespace convgen
