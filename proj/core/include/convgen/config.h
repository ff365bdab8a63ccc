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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "convgen/backend.h"
#include "convgen/corpus.h"
#include "convgen/filter.h"
#include "convgen/generator.h"
#include "convgen/http_backend.h"
#include "convgen/mock_backend.h"
#include "convgen/training.h"

namespace convgen {

enum class BackendKind { kMock, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  HttpBackendOptions http;
  /// Noise rates of the mock; its seed comes from the global seed.
  MockBackendOptions mock;
};

/// Every setting of a pipeline run.
///
/// Loaded from a JSON file; relative paths resolve against the file's
/// directory. Seeds of the generation, mock and training stages default to
/// the global seed.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  std::filesystem::path output_dir;

  std::filesystem::path corpus_path;
  CorpusFormat corpus_format = CorpusFormat::kJsonl;

  std::filesystem::path few_shot_path;
  std::size_t passage_char_budget = 1200;

  BackendConfig backend;
  std::size_t conversations = 100;
  GenerationConfig generation;
  DecodingParams decoding;

  FilterConfig filter;
  TrainConfig train;

  std::filesystem::path queries_path;  // retrieval input, JSONL {"qid", "history"}
  std::size_t retrieve_k = 10;

  std::filesystem::path qrels_path;
  std::vector<std::string> metrics = {"mrr@5", "recall@5", "map@10", "mrr", "ndcg@3"};
  int rel_threshold = 1;

  /// The merged document the fields were read from (after overrides).
  nlohmann::json document;

  /// Range checks on every field. Throws ValidationError.
  void validate() const;

  /// Hash of the named top-level sections plus the seed, used to decide
  /// whether a stage has to run again.
  std::string section_hash(std::initializer_list<std::string_view> sections) const;
};

/// Reads the JSON document at `path`. Throws ValidationError if it is
/// missing or malformed.
nlohmann::json read_config_document(const std::filesystem::path& path);

/// Sets the value at a dotted key ("generation.p_ps"). `value` is parsed as
/// JSON when possible and used as a string otherwise.
void apply_override(nlohmann::json& document, std::string_view dotted_key,
                    std::string_view value);

/// Builds a config from a document. Unknown keys and wrong types are
/// ValidationErrors naming the dotted key. "seed" is mandatory.
PipelineConfig parse_config(const nlohmann::json& document,
                            const std::filesystem::path& base_dir);

/// read_config_document + overrides + parse_config + validate.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Throws ValidationError naming the first path that does not exist.
void require_existing(const std::filesystem::path& path, std::string_view what);

}  // namespace convgen
