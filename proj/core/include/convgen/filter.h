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
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "convgen/corpus.h"
#include "convgen/dense_index.h"
#include "convgen/generator.h"
#include "convgen/model.h"
#include "convgen/training.h"

namespace convgen {

struct FilterConfig {
  std::size_t top_k = 5;
  /// Training settings for the initial retriever. Unset means the same
  /// settings as the final retriever.
  std::optional<TrainConfig> initial_train;

  void validate() const;
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t top_k = 0;
  std::vector<std::size_t> rank_histogram;  // [r-1] = pairs whose positive ranked r
  std::size_t miss = 0;

  /// {"input", "kept", "dropped", "top_k", "rank_histogram": {"1": .., "miss": ..}}
  nlohmann::json to_json() const;
};

struct FilterResult {
  std::vector<TrainingPair> kept;     // input order
  std::vector<TrainingPair> dropped;  // input order
  std::vector<std::size_t> ranks;     // per input pair; 0 = not in top_k
  FilterReport report;
};

/// One pair per turn. The query context is every query of the conversation
/// up to and including that turn, joined by single spaces. Throws DataError
/// when a turn names a passage absent from the corpus.
std::vector<TrainingPair> pairs_from_conversations(
    std::span<const SyntheticConversation> conversations, const Corpus& corpus);

/// Keeps each pair whose positive is within the top_k results of `index`
/// for its query context, using a frozen model.
FilterResult filter_with_model(std::span<const TrainingPair> pairs,
                               const DualEncoderModel& model, const DenseIndex& index,
                               std::size_t top_k, int workers = 1);

/// Trains an initial retriever on all pairs, indexes the corpus, and keeps
/// the round-trip consistent pairs. `initial_model`, when given, receives
/// the initial retriever.
FilterResult consistency_filter(std::span<const TrainingPair> pairs, const Corpus& corpus,
                                const FilterConfig& config, const TrainConfig& train_config,
                                int workers = 1,
                                std::optional<DualEncoderModel>* initial_model = nullptr);

}  // namespace convgen
