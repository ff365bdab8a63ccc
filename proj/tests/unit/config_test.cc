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


#include "convgen/config.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "test_support.h"

namespace convgen {
namespace {

using ::testing::HasSubstr;
using nlohmann::json;

std::string validation_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "<no ValidationError>";
}

TEST(ConfigTest, LoadsFixtureConfig) {
  const PipelineConfig c = load_config(testing::data_path("pipeline.json"));
  EXPECT_EQ(c.seed, 20240611u);
  EXPECT_EQ(c.corpus_path, testing::data_path("corpus.jsonl"));
  EXPECT_EQ(c.output_dir, testing::data_path("runs"));
  EXPECT_EQ(c.generation.turns_per_conversation, 7);
  EXPECT_DOUBLE_EQ(c.generation.switch_probability, 0.3);
  EXPECT_EQ(c.generation.seed, c.seed);
  EXPECT_EQ(c.backend.mock.seed, c.seed);
  EXPECT_EQ(c.train.seed, c.seed);
  EXPECT_EQ(c.train.embedding_dim, 32u);
  EXPECT_EQ(c.conversations, 60u);
  EXPECT_EQ(c.retrieve_k, 10u);
  EXPECT_EQ(c.metrics.size(), 5u);
}

TEST(ConfigTest, DefaultsFollowTheDocumentedValues) {
  const PipelineConfig c = parse_config(json{{"seed", 1}}, "/base");
  EXPECT_EQ(c.workers, 1);
  EXPECT_EQ(c.filter.top_k, 5u);
  EXPECT_FALSE(c.filter.initial_train);
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.generation.turns_per_conversation, 7);
  EXPECT_DOUBLE_EQ(c.generation.switch_probability, 0.3);
  EXPECT_EQ(c.generation.max_regeneration_attempts, 3);
  EXPECT_DOUBLE_EQ(c.decoding.top_p, 0.95);
  EXPECT_EQ(c.decoding.stop, std::vector<std::string>{"\n"});
  EXPECT_EQ(c.rel_threshold, 1);
  EXPECT_EQ(c.backend.kind, BackendKind::kMock);
  EXPECT_EQ(c.output_dir, std::filesystem::path("/base/runs"));
}

TEST(ConfigTest, SeedIsRequired) {
  EXPECT_THAT(validation_message([] { parse_config(json::object(), "."); }), HasSubstr("seed"));
}

TEST(ConfigTest, UnknownKeysAndWrongTypesNameTheKey) {
  EXPECT_THAT(validation_message([] {
                parse_config(json{{"seed", 1}, {"generation", {{"pps", 0.3}}}}, ".");
              }),
              HasSubstr("generation.pps"));
  EXPECT_THAT(validation_message([] {
                parse_config(json{{"seed", 1}, {"train", {{"epochs", "ten"}}}}, ".");
              }),
              HasSubstr("train.epochs"));
  EXPECT_THAT(validation_message([] {
                parse_config(json{{"seed", 1}, {"backend", {{"kind", "grpc"}}}}, ".");
              }),
              HasSubstr("backend.kind"));
}

TEST(ConfigTest, RangeChecks) {
  auto invalid = [](json patch) {
    json doc = {{"seed", 1}};
    doc.merge_patch(patch);
    return validation_message([&] { parse_config(doc, ".").validate(); });
  };
  EXPECT_THAT(invalid({{"generation", {{"p_ps", 1.5}}}}), HasSubstr("p_ps"));
  EXPECT_THAT(invalid({{"train", {{"batch_size", 1}}}}), HasSubstr("batch_size"));
  EXPECT_THAT(invalid({{"filter", {{"top_k", 0}}}}), HasSubstr("top_k"));
  EXPECT_THAT(invalid({{"decoding", {{"top_p", 0}}}}), HasSubstr("top_p"));
  EXPECT_THAT(invalid({{"workers", 0}}), HasSubstr("workers"));
  EXPECT_THAT(invalid({{"evaluate", {{"metrics", {"bleu"}}}}}), HasSubstr("bleu"));
  EXPECT_THAT(invalid({{"backend", {{"kind", "http"}, {"url", "localhost"}}}}),
              HasSubstr("backend.url"));
}

TEST(ConfigTest, InitialTrainInheritsFromTrain) {
  const PipelineConfig c = parse_config(
      json{{"seed", 4},
           {"train", {{"epochs", 7}, {"embedding_dim", 16}}},
           {"filter", {{"initial_train", {{"epochs", 1}}}}}},
      ".");
  ASSERT_TRUE(c.filter.initial_train);
  EXPECT_EQ(c.filter.initial_train->epochs, 1);
  EXPECT_EQ(c.filter.initial_train->embedding_dim, 16u);
  EXPECT_EQ(c.filter.initial_train->seed, 4u);
}

TEST(ConfigTest, DottedOverrides) {
  json doc = {{"seed", 1}, {"generation", {{"p_ps", 0.3}}}};
  apply_override(doc, "generation.p_ps", "0.5");
  apply_override(doc, "train.epochs", "3");
  apply_override(doc, "output_dir", "elsewhere");
  apply_override(doc, "decoding.stop", R"(["\n", "Q"])");
  EXPECT_EQ(doc["generation"]["p_ps"], 0.5);
  EXPECT_EQ(doc["train"]["epochs"], 3);
  EXPECT_EQ(doc["output_dir"], "elsewhere");
  EXPECT_EQ(doc["decoding"]["stop"].size(), 2u);
  EXPECT_THROW(apply_override(doc, "seed.x", "1"), ValidationError);
  EXPECT_THROW(apply_override(doc, "a..b", "1"), ValidationError);
  EXPECT_THROW(apply_override(doc, "", "1"), ValidationError);
}

TEST(ConfigTest, LoadAppliesOverridesBeforeValidation) {
  const PipelineConfig c = load_config(testing::data_path("pipeline.json"),
                                       {{"generation.p_ps", "0"}, {"seed", "9"}});
  EXPECT_DOUBLE_EQ(c.generation.switch_probability, 0.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.train.seed, 9u);
  EXPECT_THROW(load_config(testing::data_path("pipeline.json"), {{"generation.p_ps", "2"}}),
               ValidationError);
}

TEST(ConfigTest, MissingOrMalformedFile) {
  testing::TempDir dir;
  EXPECT_THROW(read_config_document(dir / "nope.json"), ValidationError);
  write_file(dir / "bad.json", "{ seed: ");
  EXPECT_THROW(read_config_document(dir / "bad.json"), ValidationError);
  write_file(dir / "list.json", "[1]");
  EXPECT_THROW(read_config_document(dir / "list.json"), ValidationError);
}

TEST(ConfigTest, SectionHashTracksOnlyNamedSections) {
  const PipelineConfig a = load_config(testing::data_path("pipeline.json"));
  const PipelineConfig b =
      load_config(testing::data_path("pipeline.json"), {{"train.epochs", "3"}});
  const PipelineConfig c = load_config(testing::data_path("pipeline.json"), {{"seed", "1"}});
  EXPECT_EQ(a.section_hash({"generation"}), b.section_hash({"generation"}));
  EXPECT_NE(a.section_hash({"train"}), b.section_hash({"train"}));
  EXPECT_NE(a.section_hash({"generation"}), c.section_hash({"generation"}));
}

TEST(ConfigTest, RequireExisting) {
  EXPECT_THAT(validation_message([] { require_existing("", "corpus.path"); }),
              HasSubstr("corpus.path is not set"));
  EXPECT_THAT(validation_message([] { require_existing("/no/such/file", "corpus.path"); }),
              HasSubstr("/no/such/file"));
  EXPECT_NO_THROW(require_existing(testing::data_path("corpus.jsonl"), "corpus.path"));
}

}  // namespace
}  // namespace convgen
