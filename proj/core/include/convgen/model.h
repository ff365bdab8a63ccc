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

#include "convgen/corpus.h"
#include "convgen/features.h"

namespace convgen {

using Embedding = std::vector<double>;

/// Joins a conversational query history with single spaces, oldest first.
std::string join_history(const std::vector<std::string>& history);

/// Text encoded for a passage: "title text", or just the text if untitled.
std::string passage_encoding_text(const Passage& passage);

/// Two linear towers, each a kFeatureDim x dim row-major matrix, mapping a
/// hashed bag-of-words to a dense embedding. Weights are mutated only by
/// training; a const model is safe to share across threads.
class DualEncoderModel {
 public:
  /// All-zero towers.
  static DualEncoderModel zeros(std::size_t dim, std::uint64_t seed = 0);

  /// Uniform(-scale, scale) weights from `seed`. With `tied`, the passage
  /// tower starts as an exact copy of the query tower, so the untrained
  /// model scores by (randomly projected) lexical overlap.
  static DualEncoderModel random(std::size_t dim, std::uint64_t seed,
                                 double scale = 0.01, bool tied = true);

  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  std::span<double> query_row(std::size_t feature);
  std::span<const double> query_row(std::size_t feature) const;
  std::span<double> passage_row(std::size_t feature);
  std::span<const double> passage_row(std::size_t feature) const;

  std::span<const double> query_weights() const { return query_; }
  std::span<const double> passage_weights() const { return passage_; }

  Embedding encode_query_features(const FeatureVector& x) const;
  Embedding encode_passage_features(const FeatureVector& x) const;

  /// Query tower over the joined history.
  Embedding encode_query(const std::vector<std::string>& history) const;
  Embedding encode_query_text(std::string_view query_context) const;
  Embedding encode_passage(const Passage& passage) const;

  /// True when every weight is finite.
  bool finite() const;

  /// Binary container: magic "CVGM", version, feature dim, embedding dim,
  /// seed, then both towers as little-endian float64, query tower first.
  void save(const std::filesystem::path& path) const;
  static DualEncoderModel load(const std::filesystem::path& path);

  friend bool operator==(const DualEncoderModel&, const DualEncoderModel&) = default;

 private:
  DualEncoderModel(std::size_t dim, std::uint64_t seed);

  std::size_t dim_;
  std::uint64_t seed_;
  std::vector<double> query_;
  std::vector<double> passage_;
};

/// Inner product. Throws ValidationError on a length mismatch.
double similarity(std::span<const double> query, std::span<const double> passage);

}  // namespace convgen
