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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "convgen/corpus.h"
#include "convgen/features.h"
#include "convgen/model.h"

namespace convgen {

/// Training hyperparameters. The optimizer is Adam with beta1 = 0.9,
/// beta2 = 0.999, eps = 1e-8, updating only the feature rows a batch touches.
struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 2e-2;
  int epochs = 10;
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 128;
  double init_scale = 0.01;
  bool tied_init = true;
  /// Global gradient-norm clip over both towers per batch, applied before
  /// the moment updates; 0 disables.
  double max_grad_norm = 0.0;

  /// Throws ValidationError; batch_size must be >= 2 (in-batch negatives
  /// need at least one other passage).
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep the values of `base`.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base);
  static TrainConfig from_json(const nlohmann::json& j);
};

/// One (conversational query, positive passage) example. query_context is
/// the full history up to and including the current query.
struct TrainingPair {
  std::string query_context;
  std::string positive_id;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// JSONL with keys "query_context" and "positive_id". Errors name the line.
std::vector<TrainingPair> parse_training_pairs(std::string_view contents,
                                               const std::string& source = "pairs");
std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path);
std::string serialize_training_pairs(std::span<const TrainingPair> pairs);
void save_training_pairs(const std::filesystem::path& path,
                         std::span<const TrainingPair> pairs);

/// Row-sparse gradient of one tower: for each touched feature row, `dim`
/// consecutive values. Rows are ascending.
struct SparseGradient {
  std::size_t dim = 0;
  std::vector<std::uint32_t> rows;
  std::vector<double> values;

  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values).subspan(k * dim, dim);
  }
  /// Gradient entry for (feature, column); 0 for untouched rows.
  double at(std::uint32_t feature, std::size_t column) const;
};

struct LossAndGradient {
  double loss = 0.0;
  SparseGradient query;
  SparseGradient passage;
};

/// In-batch softmax loss and exact gradients.
///
/// With S_ij = <q_i, p_j>, loss = -(1/B) sum_i (S_ii - logsumexp_j S_ij);
/// every other positive in the batch acts as a negative for query i.
/// Requires B >= 2 and queries.size() == passages.size().
LossAndGradient in_batch_loss(const DualEncoderModel& model,
                              std::span<const FeatureVector> queries,
                              std::span<const FeatureVector> passages);

/// Same, from pairs. Throws ValidationError when two pairs share a positive
/// id (they would be false negatives of each other) and DataError for ids
/// missing from the corpus.
LossAndGradient in_batch_loss(const DualEncoderModel& model,
                              std::span<const TrainingPair> batch,
                              const Corpus& corpus);

/// Splits `order` (indices into `positive_ids`) into batches of at most
/// `batch_size` with distinct positives. A pair whose positive is already
/// in the open batch is carried into the next one. Deterministic.
std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::string> positive_ids, std::span<const std::size_t> order,
    std::size_t batch_size);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::size_t batches = 0;
  std::size_t skipped = 0;  // singleton batches, which have no negatives
};

struct TrainResult {
  DualEncoderModel model;
  std::vector<EpochStats> epochs;
  double final_loss = 0.0;  // mean batch loss of the last epoch
};

/// Mini-batch Adam from DualEncoderModel::random(config...).
/// The pair order is reshuffled every epoch from the seed. Single-threaded,
/// so a fixed seed gives bit-identical weights.
TrainResult train(std::span<const TrainingPair> pairs, const Corpus& corpus,
                  const TrainConfig& config);

/// Continues training an existing model with fresh optimizer state.
TrainResult train_from(DualEncoderModel model, std::span<const TrainingPair> pairs,
                       const Corpus& corpus, const TrainConfig& config);

}  // namespace convgen
