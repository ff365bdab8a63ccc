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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convgen/rng.h"

namespace convgen {

struct Passage {
  std::string id;
  std::string doc_id;  // source document; equals id for single-passage docs
  std::string title;   // may be empty
  std::string text;

  friend bool operator==(const Passage&, const Passage&) = default;
};

enum class CorpusFormat { kJsonl, kTsv };

/// Parses "jsonl" / "tsv". Throws ValidationError otherwise.
CorpusFormat parse_corpus_format(std::string_view name);

/// In-memory passage collection. Immutable once built, so concurrent reads
/// are safe. Iteration order is insertion order.
class Corpus {
 public:
  Corpus() = default;

  /// Appends a passage. Throws DataError on an empty or duplicate id, or on
  /// text that is blank after trimming. An empty doc_id defaults to the id.
  void add(Passage p);

  std::size_t size() const { return passages_.size(); }
  bool empty() const { return passages_.empty(); }

  const Passage& at(std::size_t pos) const { return passages_.at(pos); }
  const std::vector<Passage>& passages() const { return passages_; }

  /// Position of `id`, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws DataError naming the id when absent.
  const Passage& get(std::string_view id) const;
  std::size_t position_of(std::string_view id) const;

  /// Positions of every passage of a document, ascending.
  const std::vector<std::size_t>& document(std::string_view doc_id) const;

  auto begin() const { return passages_.begin(); }
  auto end() const { return passages_.end(); }

 private:
  std::vector<Passage> passages_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_doc_;
};

/// Loads JSONL (keys "id", "doc_id", "title", "text") or TSV (columns id,
/// doc_id, title, text; no header). Errors name the 1-based line number.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus(std::string_view contents, CorpusFormat format);

/// Inverse of parse_corpus. TSV rejects fields containing tabs or newlines.
std::string serialize_corpus(const Corpus& corpus, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format);

/// Uniform draw over positions.
const Passage& sample_passage(const Corpus& corpus, Rng& rng);

/// A passage other than `current` to switch the conversation to.
///
/// Same-document passages win, nearest position first; when both neighbours
/// at equal distance exist, `rng` picks one. When `current` is the only
/// passage of its document, falls back to the passage with the highest
/// Jaccard overlap of lowercased whitespace tokens, ties to the smaller
/// position. Requires corpus size >= 2 and `current` in the corpus.
const Passage& related_passage(const Corpus& corpus, const Passage& current,
                               Rng& rng);

}  // namespace convgen
