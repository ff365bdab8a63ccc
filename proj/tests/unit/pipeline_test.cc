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

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "convgen/error.h"
#include "test_support.h"

namespace convgen {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using nlohmann::json;

PipelineConfig small_config(int workers = 1,
                            std::vector<std::pair<std::string, std::string>> extra = {}) {
  std::vector<std::pair<std::string, std::string>> overrides = {
      {"generation.conversations", "12"},
      {"train.epochs", "2"},
      {"workers", std::to_string(workers)}};
  for (auto& o : extra) overrides.push_back(std::move(o));
  return load_config(testing::data_path("pipeline.json"), overrides);
}

std::string error_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ParseConversationsTest, RoundTripsGeneratedJson) {
  SyntheticConversation c;
  c.turns = {{"who?", "p1", false}, {"why?", "p2", true}};
  c.seed = 9;
  c.backend = "mock";
  const auto parsed = parse_conversations(c.to_json().dump() + "\n", "d");
  ASSERT_EQ(parsed.size(), 1u);
  ASSERT_EQ(parsed[0].turns.size(), 2u);
  EXPECT_EQ(parsed[0].turns[1].query, "why?");
  EXPECT_EQ(parsed[0].turns[1].passage_id, "p2");
  EXPECT_TRUE(parsed[0].turns[1].switched);
}

TEST(ParseConversationsTest, ErrorsNameTheLine) {
  const std::string text = R"({"turns": [{"query": "a", "passage_id": "p"}]})"
                           "\n{not json}\n";
  EXPECT_THAT(error_message([&] { parse_conversations(text, "d.jsonl"); }),
              HasSubstr("line 2"));
  EXPECT_THROW(parse_conversations(R"({"turns": []})", "d"), DataError);
}

TEST(ParseQueriesTest, ReadsHistories) {
  const auto qs = parse_queries(
      R"({"qid": "a", "history": ["x", "y"]})"
      "\n"
      R"({"qid": "b", "history": ["z"]})",
      "q");
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0].qid, "a");
  EXPECT_EQ(qs[0].history, (std::vector<std::string>{"x", "y"}));
}

TEST(ParseQueriesTest, RejectsBadInput) {
  EXPECT_THAT(error_message([] { parse_queries("", "q.jsonl"); }), HasSubstr("no queries"));
  EXPECT_THAT(error_message([] {
                parse_queries(R"({"qid": "a", "history": ["x"]})"
                              "\n"
                              R"({"qid": "a", "history": ["y"]})",
                              "q");
              }),
              HasSubstr("repeated qid"));
  EXPECT_THAT(error_message([] { parse_queries(R"({"qid": "a", "history": []})", "q"); }),
              HasSubstr("empty history"));
  EXPECT_THROW(parse_queries(R"({"qid": "a"})", "q"), DataError);
}

TEST(RetrieveAllTest, KResultsPerQueryIndependentOfWorkers) {
  const Corpus corpus = testing::fixture_corpus();
  const DualEncoderModel model = DualEncoderModel::random(16, 4, 0.1);
  const DenseIndex idx = build_index(model, corpus);
  const auto queries = load_queries(testing::data_path("queries.jsonl"));
  const auto one = retrieve_all(model, idx, queries, 7, 1);
  const auto four = retrieve_all(model, idx, queries, 7, 4);
  ASSERT_EQ(one.size(), queries.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].query_id, queries[i].qid);
    EXPECT_EQ(one[i].entries.size(), 7u);
  }
  EXPECT_EQ(serialize_run(one, "t"), serialize_run(four, "t"));
}

TEST(PipelineTest, RunAllWritesEveryArtifact) {
  testing::TempDir dir;
  std::ostringstream progress;
  Pipeline p(small_config(), dir.path(), nullptr, &progress);
  p.run_all();
  for (const char* name :
       {artifacts::kDialogues, artifacts::kGenerationReport, artifacts::kFirstTurnTemplate,
        artifacts::kFullTemplate, artifacts::kPairs, artifacts::kKept, artifacts::kQuarantine,
        artifacts::kFilterReport, artifacts::kModel, artifacts::kLossTrace, artifacts::kIndex,
        artifacts::kRun, artifacts::kEvalReport, artifacts::kEvalTable, artifacts::kManifest,
        artifacts::kLog}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  const std::set<std::string> stages = [&] {
    std::set<std::string> s;
    for (const auto& [name, rec] : p.manifest().stages()) s.insert(name);
    return s;
  }();
  EXPECT_EQ(stages, (std::set<std::string>{"generate", "filter", "train", "index", "retrieve",
                                           "evaluate"}));
  EXPECT_EQ(p.manifest().find("train")->outputs.at(artifacts::kModel),
            sha256_file(dir / artifacts::kModel));
  EXPECT_THAT(progress.str(), HasSubstr("mrr@5"));

  const auto run = parse_run(read_file(dir / artifacts::kRun));
  EXPECT_EQ(run.size(), 50u);
}

TEST(PipelineTest, RerunSkipsCurrentStages) {
  testing::TempDir dir;
  Pipeline(small_config(), dir.path()).run_all();
  const std::string manifest = read_file(dir / artifacts::kManifest);

  Pipeline again(small_config(), dir.path());
  EXPECT_EQ(again.generate(), StageStatus::kSkipped);
  EXPECT_EQ(again.filter(), StageStatus::kSkipped);
  EXPECT_EQ(again.train(), StageStatus::kSkipped);
  EXPECT_EQ(again.retrieve(), StageStatus::kSkipped);
  EXPECT_EQ(again.evaluate(), StageStatus::kSkipped);
  EXPECT_EQ(read_file(dir / artifacts::kManifest), manifest);
  EXPECT_THAT(read_file(dir / artifacts::kLog), HasSubstr("\"skipped\""));
}

TEST(PipelineTest, ConfigChangeRerunsOnlyDownstreamStages) {
  testing::TempDir dir;
  Pipeline(small_config(), dir.path()).run_all();
  const std::string dialogues = read_file(dir / artifacts::kDialogues);

  Pipeline changed(small_config(1, {{"train.epochs", "3"}}), dir.path());
  EXPECT_EQ(changed.generate(), StageStatus::kSkipped);
  EXPECT_EQ(changed.filter(), StageStatus::kRan);  // filter retrains with train settings
  EXPECT_EQ(changed.train(), StageStatus::kRan);
  EXPECT_EQ(read_file(dir / artifacts::kDialogues), dialogues);
}

TEST(PipelineTest, TamperedOutputIsRegenerated) {
  testing::TempDir dir;
  Pipeline(small_config(), dir.path()).run_all();
  const std::string model = read_file(dir / artifacts::kModel);
  write_file(dir / artifacts::kModel, "garbage");

  Pipeline again(small_config(), dir.path());
  EXPECT_EQ(again.train(), StageStatus::kRan);
  EXPECT_EQ(read_file(dir / artifacts::kModel), model);
}

TEST(PipelineTest, ValidationPrecedesSideEffects) {
  testing::TempDir dir;
  const fs::path run = dir / "run";
  PipelineConfig config = small_config();
  config.corpus_path = dir / "missing.jsonl";
  EXPECT_THROW(Pipeline::validate_all(config), ValidationError);
  Pipeline p(config, run);
  EXPECT_THROW(p.generate(), ValidationError);
  EXPECT_FALSE(fs::exists(run / artifacts::kDialogues));

  StageInputs in;
  in.k = 0;
  EXPECT_THAT(error_message([&] { Pipeline::validate_retrieve(small_config(), in); }),
              HasSubstr("k must be"));
  in = {};
  in.pairs = dir / "nope.jsonl";
  EXPECT_THAT(error_message([&] { Pipeline::validate_train(small_config(), in); }),
              HasSubstr("pairs file not found"));
}

TEST(PipelineTest, MissingUpstreamArtifactIsAValidationError) {
  testing::TempDir dir;
  Pipeline p(small_config(), dir.path());
  EXPECT_THAT(error_message([&] { p.filter(); }), HasSubstr("dialogues file"));
  EXPECT_THROW(p.train(), ValidationError);
  EXPECT_THROW(p.retrieve(), ValidationError);
}

TEST(PipelineTest, BackendAbortKeepsFinishedConversations) {
  testing::TempDir dir;
  int calls = 0;
  auto failing = std::make_shared<testing::ScriptedBackend>(
      [&](std::string_view prompt, std::uint64_t seed) -> std::string {
        if (++calls > 30) throw BackendError("service unavailable", true, 5);
        return " " + testing::cooperative_query(prompt, seed) + "\n";
      });
  Pipeline p(small_config(), dir.path(), failing);
  EXPECT_THROW(p.generate(), BackendError);

  const auto kept = load_conversations(dir / artifacts::kDialogues);
  EXPECT_EQ(kept.size(), 30u / 7u);
  const json report = json::parse(read_file(dir / artifacts::kGenerationReport));
  EXPECT_TRUE(report.at("aborted").get<bool>());
  EXPECT_EQ(p.manifest().find("generate"), nullptr);
  EXPECT_THAT(read_file(dir / artifacts::kLog), HasSubstr("\"aborted\""));
}

TEST(PipelineTest, ExplicitInputsOverrideRunArtifacts) {
  testing::TempDir dir;
  Pipeline first(small_config(), dir / "a");
  fs::create_directories(dir / "a");
  first.generate();
  first.filter();
  first.train();

  fs::create_directories(dir / "b");
  Pipeline second(small_config(), dir / "b");
  StageInputs in;
  in.model = dir / "a" / artifacts::kModel;
  in.k = 3;
  EXPECT_EQ(second.retrieve(in), StageStatus::kRan);
  for (const auto& [qid, list] : parse_run(read_file(dir / "b" / artifacts::kRun))) {
    EXPECT_EQ(list.entries.size(), 3u) << qid;
  }
  EXPECT_FALSE(fs::exists(dir / "b" / artifacts::kDialogues));
}

TEST(RunDirTest, CreatesDistinctDirectoriesAndTracksLatest) {
  testing::TempDir dir;
  EXPECT_THROW(latest_run_dir(dir / "runs"), ValidationError);
  const fs::path a = create_run_dir(dir / "runs");
  const fs::path b = create_run_dir(dir / "runs");
  EXPECT_NE(a, b);
  EXPECT_TRUE(fs::is_directory(a));
  EXPECT_TRUE(fs::is_directory(b));
  EXPECT_EQ(fs::canonical(latest_run_dir(dir / "runs")), fs::canonical(b));
}

TEST(ManifestTest, RoundTripsAndDetectsChanges) {
  testing::TempDir dir;
  write_file(dir / "out.txt", "hello");
  StageRecord rec;
  rec.config_hash = "c";
  rec.inputs = {{"x", "1"}};
  rec.outputs = {{"out.txt", sha256_file(dir / "out.txt")}};
  Manifest m;
  m.record("s", rec);
  m.save(dir / "manifest.json");
  const Manifest loaded = Manifest::load_or_empty(dir / "manifest.json");
  ASSERT_NE(loaded.find("s"), nullptr);
  EXPECT_EQ(*loaded.find("s"), rec);
  EXPECT_TRUE(loaded.is_current("s", "c", {{"x", "1"}}, dir.path()));
  EXPECT_FALSE(loaded.is_current("s", "d", {{"x", "1"}}, dir.path()));
  EXPECT_FALSE(loaded.is_current("s", "c", {{"x", "2"}}, dir.path()));
  EXPECT_FALSE(loaded.is_current("t", "c", {{"x", "1"}}, dir.path()));
  write_file(dir / "out.txt", "changed");
  EXPECT_FALSE(loaded.is_current("s", "c", {{"x", "1"}}, dir.path()));
  EXPECT_TRUE(Manifest::load_or_empty(dir / "none.json").stages().empty());
}

TEST(JsonlLogTest, AppendsTimestampedRecords) {
  testing::TempDir dir;
  JsonlLog log(dir / "log.jsonl");
  log.write({{"event", "a"}});
  log.write({{"event", "b"}});
  std::istringstream lines(read_file(dir / "log.jsonl"));
  std::string line;
  std::vector<json> records;
  while (std::getline(lines, line)) records.push_back(json::parse(line));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].at("event"), "b");
  EXPECT_TRUE(records[0].contains("time"));
}

}  // namespace
}  // namespace convgen
