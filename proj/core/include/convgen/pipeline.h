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

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convgen/config.h"
#include "convgen/dense_index.h"
#include "convgen/eval.h"
#include "convgen/generator.h"
#include "convgen/manifest.h"
#include "convgen/model.h"

namespace convgen {

// Artifact names inside a run directory.
namespace artifacts {
inline constexpr const char* kDialogues = "dialogues.jsonl";
inline constexpr const char* kGenerationReport = "generation_report.json";
inline constexpr const char* kFirstTurnTemplate = "template_first_turn.txt";
inline constexpr const char* kFullTemplate = "template_full.txt";
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kKept = "kept.jsonl";
inline constexpr const char* kQuarantine = "quarantine.jsonl";
inline constexpr const char* kFilterReport = "filter_report.json";
inline constexpr const char* kModel = "model.bin";
inline constexpr const char* kLossTrace = "train_loss.jsonl";
inline constexpr const char* kIndex = "index.bin";
inline constexpr const char* kRun = "run.trec";
inline constexpr const char* kEvalReport = "eval.json";
inline constexpr const char* kEvalTable = "eval.txt";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kLog = "log.jsonl";
}  // namespace artifacts

/// One line of a dialogues file per conversation. Errors name the line.
std::vector<SyntheticConversation> parse_conversations(std::string_view contents,
                                                       const std::string& source);
std::vector<SyntheticConversation> load_conversations(const std::filesystem::path& path);

/// A retrieval request: query id plus the conversation so far, oldest first.
struct ConversationalQuery {
  std::string qid;
  std::vector<std::string> history;
};

/// JSONL {"qid": ..., "history": [...]}. Throws DataError on an empty file,
/// a malformed line, or a repeated qid.
std::vector<ConversationalQuery> parse_queries(std::string_view contents,
                                               const std::string& source);
std::vector<ConversationalQuery> load_queries(const std::filesystem::path& path);

/// Top-k search for every query, in input order.
std::vector<RankedList> retrieve_all(const DualEncoderModel& model, const DenseIndex& index,
                                     const std::vector<ConversationalQuery>& queries,
                                     std::size_t k, int workers = 1);

/// Builds the completion backend a config asks for.
std::unique_ptr<CompletionBackend> make_backend(const PipelineConfig& config);

enum class StageStatus { kRan, kSkipped };

/// Explicit stage inputs; unset ones default to the artifact in the run
/// directory written by the previous stage.
struct StageInputs {
  std::optional<std::filesystem::path> dialogues;
  std::optional<std::filesystem::path> pairs;
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> queries;
  std::optional<std::filesystem::path> run;
  std::optional<std::filesystem::path> qrels;
  std::optional<std::size_t> k;
};

/// The stages of an experiment, each reading and writing artifacts in one
/// run directory and recording content hashes in its manifest. A stage whose
/// config and inputs match the manifest, and whose outputs are intact, is
/// skipped.
class Pipeline {
 public:
  /// `backend` overrides the configured one (tests inject fakes).
  Pipeline(PipelineConfig config, std::filesystem::path run_dir,
           std::shared_ptr<CompletionBackend> backend = nullptr,
           std::ostream* progress = nullptr);

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  const Manifest& manifest() const { return manifest_; }

  /// Fail-fast checks of everything a stage needs that exists before it
  /// runs, so callers can validate before creating a run directory. Throw
  /// ValidationError.
  static void validate_generate(const PipelineConfig& config);
  static void validate_filter(const PipelineConfig& config, const StageInputs& in);
  static void validate_train(const PipelineConfig& config, const StageInputs& in);
  static void validate_retrieve(const PipelineConfig& config, const StageInputs& in);
  static void validate_evaluate(const PipelineConfig& config, const StageInputs& in);
  static void validate_all(const PipelineConfig& config);

  StageStatus generate();
  StageStatus filter(const StageInputs& in = {});
  StageStatus train(const StageInputs& in = {});
  StageStatus index(const StageInputs& in = {});
  StageStatus retrieve(const StageInputs& in = {});
  /// Also returns the report through `report` when given.
  StageStatus evaluate(const StageInputs& in = {}, EvalReport* report = nullptr);

  /// generate, filter, train, index, retrieve, evaluate.
  void run_all();

 private:
  std::filesystem::path artifact(const char* name) const { return run_dir_ / name; }
  std::filesystem::path input_or(const std::optional<std::filesystem::path>& given,
                                 const char* name) const;
  bool up_to_date(const std::string& stage, const std::string& config_hash,
                  const std::map<std::string, std::string>& inputs);
  void finish_stage(const std::string& stage, const std::string& config_hash,
                    std::map<std::string, std::string> inputs,
                    const std::vector<const char*>& outputs, nlohmann::json counts,
                    double seconds);
  void note(const std::string& message) const;
  const Corpus& corpus();

  PipelineConfig config_;
  std::filesystem::path run_dir_;
  std::shared_ptr<CompletionBackend> backend_;
  std::ostream* progress_;
  Manifest manifest_;
  JsonlLog log_;
  std::optional<Corpus> corpus_;
};

}  // namespace convgen
