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


#include "convgen/pipeline.h"

#include <chrono>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include "convgen/error.h"
#include "convgen/filter.h"
#include "convgen/hashing.h"
#include "convgen/parallel.h"
#include "convgen/prompt.h"
#include "convgen/text.h"
#include "convgen/training.h"

namespace convgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kRunTag = "convgen";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
void for_each_jsonl(std::string_view contents, const std::string& source, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    ++line_no;
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    if (text::trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no) + ": ";
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw DataError(where + "malformed JSON");
    try {
      fn(j, where);
    } catch (const json::exception& e) {
      throw DataError(where + e.what());
    }
  }
}

}  // namespace

std::vector<SyntheticConversation> parse_conversations(std::string_view contents,
                                                       const std::string& source) {
  std::vector<SyntheticConversation> out;
  for_each_jsonl(contents, source, [&](const json& j, const std::string& where) {
    SyntheticConversation c = SyntheticConversation::from_json(j);
    if (c.turns.empty()) throw DataError(where + "conversation has no turns");
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<SyntheticConversation> load_conversations(const fs::path& path) {
  return parse_conversations(read_file(path), path.string());
}

std::vector<ConversationalQuery> parse_queries(std::string_view contents,
                                               const std::string& source) {
  std::vector<ConversationalQuery> out;
  std::unordered_set<std::string> seen;
  for_each_jsonl(contents, source, [&](const json& j, const std::string& where) {
    ConversationalQuery q;
    q.qid = j.at("qid").get<std::string>();
    q.history = j.at("history").get<std::vector<std::string>>();
    if (q.qid.empty()) throw DataError(where + "empty qid");
    if (q.history.empty()) throw DataError(where + "empty history");
    if (!seen.insert(q.qid).second) throw DataError(where + "repeated qid \"" + q.qid + "\"");
    out.push_back(std::move(q));
  });
  if (out.empty()) throw DataError(source + ": no queries");
  return out;
}

std::vector<ConversationalQuery> load_queries(const fs::path& path) {
  return parse_queries(read_file(path), path.string());
}

std::vector<RankedList> retrieve_all(const DualEncoderModel& model, const DenseIndex& index,
                                     const std::vector<ConversationalQuery>& queries,
                                     std::size_t k, int workers) {
  std::vector<RankedList> out(queries.size());
  parallel_for(0, queries.size(), workers, [&](std::size_t i) {
    out[i] = search(index, model.encode_query(queries[i].history), k);
    out[i].query_id = queries[i].qid;
  });
  return out;
}

std::unique_ptr<CompletionBackend> make_backend(const PipelineConfig& config) {
  if (config.backend.kind == BackendKind::kHttp) {
    return std::make_unique<HttpBackend>(config.backend.http);
  }
  return std::make_unique<MockBackend>(config.backend.mock);
}

Pipeline::Pipeline(PipelineConfig config, fs::path run_dir,
                   std::shared_ptr<CompletionBackend> backend, std::ostream* progress)
    : config_(std::move(config)),
      run_dir_(std::move(run_dir)),
      backend_(std::move(backend)),
      progress_(progress),
      manifest_(Manifest::load_or_empty(run_dir_ / artifacts::kManifest)),
      log_(run_dir_ / artifacts::kLog) {}

fs::path Pipeline::input_or(const std::optional<fs::path>& given, const char* name) const {
  return given ? *given : artifact(name);
}

void Pipeline::note(const std::string& message) const {
  if (progress_) *progress_ << message << '\n';
}

const Corpus& Pipeline::corpus() {
  if (!corpus_) corpus_ = load_corpus(config_.corpus_path, config_.corpus_format);
  return *corpus_;
}

bool Pipeline::up_to_date(const std::string& stage, const std::string& config_hash,
                          const std::map<std::string, std::string>& inputs) {
  // Every stage checks this before its first write.
  fs::create_directories(run_dir_);
  if (!manifest_.is_current(stage, config_hash, inputs, run_dir_)) return false;
  log_.write({{"stage", stage}, {"event", "skipped"}});
  note(stage + ": up to date, skipped");
  return true;
}

void Pipeline::finish_stage(const std::string& stage, const std::string& config_hash,
                            std::map<std::string, std::string> inputs,
                            const std::vector<const char*>& outputs, json counts,
                            double seconds) {
  StageRecord rec;
  rec.config_hash = config_hash;
  rec.inputs = std::move(inputs);
  for (const char* name : outputs) rec.outputs[name] = sha256_file(artifact(name));
  manifest_.record(stage, std::move(rec));
  manifest_.save(artifact(artifacts::kManifest));
  log_.write({{"stage", stage}, {"event", "done"}, {"counts", counts},
              {"duration_seconds", seconds}});
}

void Pipeline::validate_generate(const PipelineConfig& config) {
  require_existing(config.corpus_path, "corpus.path");
  require_existing(config.few_shot_path, "few_shot.path");
}

void Pipeline::validate_filter(const PipelineConfig& config, const StageInputs& in) {
  require_existing(config.corpus_path, "corpus.path");
  if (in.dialogues) require_existing(*in.dialogues, "dialogues file");
}

void Pipeline::validate_train(const PipelineConfig& config, const StageInputs& in) {
  require_existing(config.corpus_path, "corpus.path");
  if (in.pairs) require_existing(*in.pairs, "pairs file");
}

void Pipeline::validate_retrieve(const PipelineConfig& config, const StageInputs& in) {
  require_existing(config.corpus_path, "corpus.path");
  require_existing(in.queries ? *in.queries : config.queries_path, "retrieve.queries");
  if (in.model) require_existing(*in.model, "model file");
  if (in.k && *in.k < 1) throw ValidationError("k must be >= 1");
}

void Pipeline::validate_evaluate(const PipelineConfig& config, const StageInputs& in) {
  require_existing(in.qrels ? *in.qrels : config.qrels_path, "evaluate.qrels");
  if (in.run) require_existing(*in.run, "run file");
}

void Pipeline::validate_all(const PipelineConfig& config) {
  validate_generate(config);
  validate_retrieve(config, {});
  validate_evaluate(config, {});
}

StageStatus Pipeline::generate() {
  validate_generate(config_);
  const auto start = Clock::now();
  const std::string stage = "generate";
  const std::string cfg_hash =
      config_.section_hash({"few_shot", "backend", "generation", "decoding"});
  std::map<std::string, std::string> inputs = {
      {"corpus", sha256_file(config_.corpus_path)},
      {"few_shot", sha256_file(config_.few_shot_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) return StageStatus::kSkipped;

  const Corpus& passages = corpus();
  const FewShotSet shots = load_few_shot(config_.few_shot_path, &passages);
  const Template first = build_first_turn_template(shots, config_.passage_char_budget);
  const Template full = build_full_template(shots, config_.passage_char_budget);
  first.save(artifact(artifacts::kFirstTurnTemplate));
  full.save(artifact(artifacts::kFullTemplate));

  std::shared_ptr<CompletionBackend> backend = backend_;
  if (!backend) backend = make_backend(config_);

  manifest_.erase(stage);
  std::ofstream out(artifact(artifacts::kDialogues), std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + artifact(artifacts::kDialogues).string());
  auto sink = [&](const SyntheticConversation& c) { out << c.to_json().dump() << '\n'; };
  auto on_abort = [&](const GenerationReport& r) {
    out.flush();
    write_file(artifact(artifacts::kGenerationReport), r.to_json().dump(2) + "\n");
    log_.write({{"stage", stage}, {"event", "aborted"}, {"reason", r.abort_reason},
                {"counts", {{"emitted", r.emitted}}}});
  };
  const GenerationReport report =
      generate_dataset(passages, first, full, *backend, config_.generation, config_.decoding,
                       config_.conversations, sink, config_.workers, on_abort);
  out.close();
  if (!out) throw DataError("write failed: " + artifact(artifacts::kDialogues).string());
  write_file(artifact(artifacts::kGenerationReport), report.to_json().dump(2) + "\n");
  note("generate: " + std::to_string(report.emitted) + " conversations, " +
       std::to_string(report.turns) + " turns");
  finish_stage(stage, cfg_hash, std::move(inputs),
               {artifacts::kDialogues, artifacts::kGenerationReport,
                artifacts::kFirstTurnTemplate, artifacts::kFullTemplate},
               {{"conversations", report.emitted}, {"turns", report.turns},
                {"backend_calls", report.backend_calls}},
               seconds_since(start));
  return StageStatus::kRan;
}

StageStatus Pipeline::filter(const StageInputs& in) {
  validate_filter(config_, in);
  const auto start = Clock::now();
  const std::string stage = "filter";
  const fs::path dialogues_path = input_or(in.dialogues, artifacts::kDialogues);
  require_existing(dialogues_path, "dialogues file");
  const std::string cfg_hash = config_.section_hash({"filter", "train"});
  std::map<std::string, std::string> inputs = {{"corpus", sha256_file(config_.corpus_path)},
                                               {"dialogues", sha256_file(dialogues_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) return StageStatus::kSkipped;

  const auto conversations = load_conversations(dialogues_path);
  const auto pairs = pairs_from_conversations(conversations, corpus());
  if (pairs.empty()) throw DataError(dialogues_path.string() + ": no conversations to filter");
  manifest_.erase(stage);
  save_training_pairs(artifact(artifacts::kPairs), pairs);
  const FilterResult result =
      consistency_filter(pairs, corpus(), config_.filter, config_.train, config_.workers);
  save_training_pairs(artifact(artifacts::kKept), result.kept);
  save_training_pairs(artifact(artifacts::kQuarantine), result.dropped);
  write_file(artifact(artifacts::kFilterReport), result.report.to_json().dump(2) + "\n");
  note("filter: kept " + std::to_string(result.report.kept) + " of " +
       std::to_string(result.report.input) + " pairs");
  finish_stage(stage, cfg_hash, std::move(inputs),
               {artifacts::kPairs, artifacts::kKept, artifacts::kQuarantine,
                artifacts::kFilterReport},
               {{"input", result.report.input}, {"kept", result.report.kept},
                {"dropped", result.report.dropped}},
               seconds_since(start));
  return StageStatus::kRan;
}

StageStatus Pipeline::train(const StageInputs& in) {
  validate_train(config_, in);
  const auto start = Clock::now();
  const std::string stage = "train";
  const fs::path pairs_path = input_or(in.pairs, artifacts::kKept);
  require_existing(pairs_path, "pairs file");
  const std::string cfg_hash = config_.section_hash({"train"});
  std::map<std::string, std::string> inputs = {{"corpus", sha256_file(config_.corpus_path)},
                                               {"pairs", sha256_file(pairs_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) return StageStatus::kSkipped;

  const auto pairs = load_training_pairs(pairs_path);
  if (pairs.empty()) throw DataError(pairs_path.string() + ": no training pairs");
  manifest_.erase(stage);
  const TrainResult result = convgen::train(pairs, corpus(), config_.train);
  result.model.save(artifact(artifacts::kModel));
  std::string trace;
  for (const auto& e : result.epochs) {
    trace += json{{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"batches", e.batches},
                  {"skipped", e.skipped}}
                 .dump();
    trace += '\n';
  }
  write_file(artifact(artifacts::kLossTrace), trace);
  note("train: " + std::to_string(pairs.size()) + " pairs, final loss " +
       std::to_string(result.final_loss));
  finish_stage(stage, cfg_hash, std::move(inputs), {artifacts::kModel, artifacts::kLossTrace},
               {{"pairs", pairs.size()}, {"epochs", result.epochs.size()},
                {"final_loss", result.final_loss}},
               seconds_since(start));
  return StageStatus::kRan;
}

StageStatus Pipeline::index(const StageInputs& in) {
  const auto start = Clock::now();
  const std::string stage = "index";
  require_existing(config_.corpus_path, "corpus.path");
  const fs::path model_path = input_or(in.model, artifacts::kModel);
  require_existing(model_path, "model file");
  const std::string cfg_hash = config_.section_hash({});
  std::map<std::string, std::string> inputs = {{"corpus", sha256_file(config_.corpus_path)},
                                               {"model", sha256_file(model_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) return StageStatus::kSkipped;

  manifest_.erase(stage);
  const DualEncoderModel model = DualEncoderModel::load(model_path);
  const DenseIndex idx = build_index(model, corpus(), config_.workers);
  idx.save(artifact(artifacts::kIndex));
  finish_stage(stage, cfg_hash, std::move(inputs), {artifacts::kIndex},
               {{"passages", idx.size()}}, seconds_since(start));
  return StageStatus::kRan;
}

StageStatus Pipeline::retrieve(const StageInputs& in) {
  validate_retrieve(config_, in);
  const auto start = Clock::now();
  const std::string stage = "retrieve";
  const fs::path model_path = input_or(in.model, artifacts::kModel);
  const fs::path queries_path = in.queries ? *in.queries : config_.queries_path;
  require_existing(model_path, "model file");
  const std::size_t k = in.k ? *in.k : config_.retrieve_k;

  StageInputs index_in;
  index_in.model = model_path;
  index(index_in);

  const std::string cfg_hash =
      sha256_hex(config_.section_hash({"retrieve"}) + ":" + std::to_string(k));
  std::map<std::string, std::string> inputs = {{"index", sha256_file(artifact(artifacts::kIndex))},
                                               {"model", sha256_file(model_path)},
                                               {"queries", sha256_file(queries_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) return StageStatus::kSkipped;

  const auto queries = load_queries(queries_path);
  manifest_.erase(stage);
  const DualEncoderModel model = DualEncoderModel::load(model_path);
  const DenseIndex idx = DenseIndex::load(artifact(artifacts::kIndex));
  const auto lists = retrieve_all(model, idx, queries, k, config_.workers);
  write_file(artifact(artifacts::kRun), serialize_run(lists, kRunTag));
  note("retrieve: " + std::to_string(lists.size()) + " queries, k = " + std::to_string(k));
  finish_stage(stage, cfg_hash, std::move(inputs), {artifacts::kRun},
               {{"queries", lists.size()}, {"k", k}}, seconds_since(start));
  return StageStatus::kRan;
}

StageStatus Pipeline::evaluate(const StageInputs& in, EvalReport* report_out) {
  validate_evaluate(config_, in);
  const auto start = Clock::now();
  const std::string stage = "evaluate";
  const fs::path run_path = input_or(in.run, artifacts::kRun);
  const fs::path qrels_path = in.qrels ? *in.qrels : config_.qrels_path;
  require_existing(run_path, "run file");
  std::vector<MetricSpec> metrics;
  for (const auto& m : config_.metrics) metrics.push_back(MetricSpec::parse(m));

  const std::string cfg_hash = config_.section_hash({"evaluate"});
  std::map<std::string, std::string> inputs = {{"qrels", sha256_file(qrels_path)},
                                               {"run", sha256_file(run_path)}};
  if (up_to_date(stage, cfg_hash, inputs)) {
    if (report_out) {
      *report_out = evaluate_run(run_path, qrels_path, metrics, config_.rel_threshold);
    }
    return StageStatus::kSkipped;
  }

  manifest_.erase(stage);
  EvalReport report = evaluate_run(run_path, qrels_path, metrics, config_.rel_threshold);
  write_file(artifact(artifacts::kEvalReport), report.to_json().dump(2) + "\n");
  write_file(artifact(artifacts::kEvalTable), report.to_table());
  json means = json::object();
  for (const auto& m : report.metrics) means[m.name] = m.mean ? json(*m.mean) : json(nullptr);
  finish_stage(stage, cfg_hash, std::move(inputs), {artifacts::kEvalReport, artifacts::kEvalTable},
               {{"queries", report.queries}, {"metrics", means}}, seconds_since(start));
  if (report_out) *report_out = std::move(report);
  return StageStatus::kRan;
}

void Pipeline::run_all() {
  validate_all(config_);
  generate();
  filter();
  train();
  retrieve();
  EvalReport report;
  evaluate({}, &report);
  if (progress_) *progress_ << report.to_table();
}

}  // namespace convgen
