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


#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "convgen/degeneration.h"
#include "convgen/eval.h"
#include "convgen/filter.h"
#include "convgen/generator.h"
#include "convgen/hashing.h"
#include "convgen/mock_backend.h"
#include "convgen/pipeline.h"
#include "convgen/prompt.h"
#include "convgen/text.h"
#include "convgen/training.h"
#include "gradient_check.h"
#include "reference_metrics.h"
#include "test_support.h"

namespace convgen {
namespace {

namespace fs = std::filesystem;
namespace ref = testing::reference;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RankedList ranked(const std::vector<std::string>& ids, std::string qid = "q") {
  RankedList r;
  r.query_id = std::move(qid);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    r.entries.push_back({ids[i], static_cast<double>(ids.size() - i)});
  }
  return r;
}

void expect_same(std::optional<double> got, std::optional<double> want) {
  ASSERT_EQ(got.has_value(), want.has_value());
  if (got) EXPECT_NEAR(*got, *want, 1e-9);
}

TrainConfig toy_train() {
  TrainConfig c;
  c.embedding_dim = 32;
  c.seed = 5;
  return c;
}

// 1. Metrics agree with an independent implementation.

TEST(Criterion1, MetricsMatchReferenceOnRandomInstances) {
  const auto start = Clock::now();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ref::Instance inst = ref::random_instance(seed);
    for (const auto& [qid, ids] : inst.rankings) {
      const RankedList list = ranked(ids, qid);
      const Judgments& j = inst.judgments.at(qid);
      for (std::size_t k : {0u, 1u, 3u, 5u, 10u, 20u}) {
        for (int thr : {1, 2}) {
          expect_same(mrr_at_k(list, j, k, thr), ref::mrr(ids, j, k, thr));
          expect_same(recall_at_k(list, j, k, thr), ref::recall(ids, j, k, thr));
          expect_same(map_at_k(list, j, k, thr), ref::average_precision(ids, j, k, thr));
        }
        expect_same(ndcg_at_k(list, j, k), ref::ndcg(ids, j, k));
      }
    }
  }
  EXPECT_LT(seconds_since(start), 5.0);
}

TEST(Criterion1, WorkedExamples) {
  convgen::Run run;
  run["q1"] = ranked({"r1", "x", "y"}, "q1");
  run["q2"] = ranked({"x", "y", "r2"}, "q2");
  run["q3"] = ranked({"x", "y", "z"}, "q3");
  const Qrels qrels = {{"q1", {{"r1", 1}}}, {"q2", {{"r2", 1}}}, {"q3", {{"r3", 1}}}};
  const std::vector<MetricSpec> mrr = {MetricSpec::parse("mrr@5")};
  EXPECT_NEAR(*evaluate(run, qrels, mrr).metrics[0].mean, (1.0 + 1.0 / 3.0) / 3.0, 1e-12);
  EXPECT_EQ(*map_at_k(ranked({"r1", "a", "b", "r2", "c"}), {{"r1", 1}, {"r2", 1}}, 10), 0.75);
  const double ndcg = *ndcg_at_k(ranked({"a", "b", "c"}), {{"a", 2}, {"b", 0}, {"c", 1}}, 3);
  EXPECT_NEAR(ndcg, 2.5 / (2.0 + 1.0 / std::log2(3.0)), 1e-12);
  EXPECT_NEAR(ndcg, 0.9503, 1e-4);
}

// 2. The analytic gradient matches finite differences.

TEST(Criterion2, GradientMatchesFiniteDifferences) {
  const auto start = Clock::now();
  Rng rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    testing::GradientInstance inst = testing::random_gradient_instance(rng);
    EXPECT_LT(testing::max_gradient_error(inst), 1e-4) << "trial " << trial;
  }
  EXPECT_LT(seconds_since(start), 10.0);
}

// 3. Equal scores give a loss of ln B.

TEST(Criterion3, ZeroModelLossIsLogB) {
  const DualEncoderModel m = DualEncoderModel::zeros(8);
  for (std::size_t b : {2u, 4u, 8u}) {
    std::vector<FeatureVector> qs, ps;
    for (std::size_t i = 0; i < b; ++i) {
      qs.push_back(featurize("query " + std::to_string(i)));
      ps.push_back(featurize("passage " + std::to_string(i)));
    }
    EXPECT_NEAR(in_batch_loss(m, qs, ps).loss, std::log(static_cast<double>(b)), 1e-12);
  }
}

// 4. Training learns a separable toy task.

TEST(Criterion4, TrainingLearnsSeparableToy) {
  const auto start = Clock::now();
  const testing::SeparableToy toy = testing::separable_toy(1);
  const TrainResult r = train(toy.train, toy.corpus, toy_train());
  const double trained = testing::mrr_at_5(r.model, build_index(r.model, toy.corpus), toy.held_out);

  const TrainConfig c = toy_train();
  const DualEncoderModel untrained =
      DualEncoderModel::random(c.embedding_dim, c.seed, c.init_scale, c.tied_init);
  const double baseline =
      testing::mrr_at_5(untrained, build_index(untrained, toy.corpus), toy.held_out);
  std::printf("toy MRR@5: trained %.4f, untrained %.4f\n", trained, baseline);
  EXPECT_GE(trained, 0.9);
  EXPECT_LE(baseline, 0.1);
  EXPECT_LT(seconds_since(start), 60.0);
}

// 5. The consistency filter separates grounded from ungrounded pairs.

class Criterion5 : public ::testing::Test {
 protected:
  // A short, nearly lexical initial retriever. Trained to convergence on
  // all pairs it memorizes the mismatched ones too.
  static TrainConfig initial_train() {
    TrainConfig c = final_train();
    c.epochs = 1;
    c.learning_rate = 3e-4;
    return c;
  }

  static TrainConfig final_train() {
    TrainConfig c;
    c.seed = 5;
    return c;
  }

  static bool contains(const std::vector<TrainingPair>& set, const TrainingPair& p) {
    return std::find(set.begin(), set.end(), p) != set.end();
  }

  testing::FilterToy toy_ = testing::adversarial_filter_toy(11);
  std::vector<TrainingPair> all_ = [this] {
    std::vector<TrainingPair> v = toy_.matched;
    v.insert(v.end(), toy_.mismatched.begin(), toy_.mismatched.end());
    return v;
  }();
};

TEST_F(Criterion5, TopOneFilterSeparatesMatchedFromMismatched) {
  FilterConfig cfg;
  cfg.top_k = 1;
  cfg.initial_train = initial_train();
  const FilterResult r = consistency_filter(all_, toy_.corpus, cfg, final_train());
  std::size_t matched_kept = 0, mismatched_dropped = 0;
  for (const auto& p : toy_.matched) matched_kept += contains(r.kept, p);
  for (const auto& p : toy_.mismatched) mismatched_dropped += contains(r.dropped, p);
  const double keep = static_cast<double>(matched_kept) / toy_.matched.size();
  const double drop = static_cast<double>(mismatched_dropped) / toy_.mismatched.size();
  std::printf("filter: kept %.3f of matched, dropped %.3f of mismatched\n", keep, drop);
  EXPECT_GE(keep, 0.9);
  EXPECT_GE(drop, 0.9);
}

TEST_F(Criterion5, KeptSetGrowsWithK) {
  FilterConfig cfg;
  cfg.initial_train = initial_train();
  std::optional<DualEncoderModel> model;
  consistency_filter(all_, toy_.corpus, cfg, final_train(), 1, &model);
  const DenseIndex index = build_index(*model, toy_.corpus);
  std::vector<std::vector<TrainingPair>> kept;
  for (std::size_t k = 1; k <= 10; ++k) kept.push_back(filter_with_model(all_, *model, index, k).kept);
  for (std::size_t k = 1; k < kept.size(); ++k) {
    for (const auto& p : kept[k - 1]) EXPECT_TRUE(contains(kept[k], p)) << "k = " << k;
  }
}

TEST_F(Criterion5, FilteredTrainingBeatsUnfiltered) {
  FilterConfig cfg;
  cfg.top_k = 1;
  cfg.initial_train = initial_train();
  const FilterResult r = consistency_filter(all_, toy_.corpus, cfg, final_train());
  const TrainResult filtered = train(r.kept, toy_.corpus, final_train());
  const TrainResult unfiltered = train(all_, toy_.corpus, final_train());
  const double f = testing::mrr_at_5(filtered.model, build_index(filtered.model, toy_.corpus),
                                     toy_.held_out);
  const double u = testing::mrr_at_5(unfiltered.model,
                                     build_index(unfiltered.model, toy_.corpus), toy_.held_out);
  std::printf("held-out MRR@5: filtered %.4f, unfiltered %.4f\n", f, u);
  EXPECT_GE(f - u, 0.05);
}

// 6. Prompts are rendered exactly.

TEST(Criterion6, GoldenPrompts) {
  const Corpus corpus = testing::fixture_corpus();
  const FewShotSet shots = testing::fixture_few_shot();
  EXPECT_EQ(render_prompt(build_first_turn_template(shots), corpus.get("blue_whale-0"), {}),
            read_file(testing::data_path("golden_first_turn_prompt.txt")));
  EXPECT_EQ(render_prompt(build_full_template(shots), corpus.get("blue_whale-1"),
                          {"what is the krill of Blue whale?", "what about the calves?"}),
            read_file(testing::data_path("golden_full_prompt_turn3.txt")));
}

TEST(Criterion6, FullPromptStructure) {
  const Corpus corpus = testing::fixture_corpus();
  const Template t = build_full_template(testing::fixture_few_shot());
  const Passage& target = corpus.get("petra-1");
  const std::vector<std::string> priors = {"who first described it?", "where does it live?"};
  const std::string prompt = render_prompt(t, target, priors);
  EXPECT_TRUE(prompt.starts_with(t.text()));
  EXPECT_EQ(testing::cue_number(prompt), 3);
  EXPECT_EQ(testing::trailing_queries(prompt), priors);
  EXPECT_EQ(testing::target_passage(prompt), text::single_line(target.text));
}

// 7. Passage switching follows its probability.

TEST(Criterion7, SwitchProbabilityExtremesAndMidpoint) {
  const Corpus c = testing::fixture_corpus();
  Rng rng(20240611);
  const Passage* current = &c.at(0);
  for (int i = 0; i < 1000; ++i) {
    auto [next, switched] = switch_passage(*current, c, 0.0, rng);
    ASSERT_FALSE(switched);
    ASSERT_EQ(next, current);
  }
  for (int i = 0; i < 1000; ++i) {
    auto [next, switched] = switch_passage(*current, c, 1.0, rng);
    ASSERT_TRUE(switched);
    ASSERT_NE(next->id, current->id);
    current = next;
  }
  int switches = 0;
  for (int i = 0; i < 10000; ++i) {
    auto [next, switched] = switch_passage(*current, c, 0.5, rng);
    switches += switched;
    current = next;
  }
  EXPECT_GE(switches, 4800);
  EXPECT_LE(switches, 5200);
}

TEST(Criterion7, GeneratedConversationsHonourTheProbability) {
  const Corpus corpus = testing::fixture_corpus();
  const FewShotSet shots = testing::fixture_few_shot();
  const Template first = build_first_turn_template(shots);
  const Template full = build_full_template(shots);
  auto backend = testing::cooperative_backend();
  GenerationConfig cfg;
  cfg.turns_per_conversation = 7;
  for (double p : {0.0, 1.0}) {
    cfg.switch_probability = p;
    for (std::uint64_t idx = 0; idx < 10; ++idx) {
      const auto o = generate_conversation(corpus, first, full, *backend, cfg, {}, idx);
      ASSERT_TRUE(o.conversation);
      EXPECT_EQ(o.switches, p == 0.0 ? 0 : o.switch_opportunities);
    }
  }
}

// 8. A full run is reproducible and independent of the worker count.

TEST(Criterion8, PipelineIsDeterministicAcrossWorkers) {
  const auto start = Clock::now();
  testing::TempDir dir;
  for (int workers : {1, 4}) {
    const PipelineConfig config =
        load_config(testing::data_path("pipeline.json"), {{"workers", std::to_string(workers)}});
    Pipeline(config, dir / ("w" + std::to_string(workers))).run_all();
  }
  for (const char* name : {artifacts::kDialogues, artifacts::kKept, artifacts::kModel,
                           artifacts::kRun, artifacts::kEvalReport, artifacts::kManifest}) {
    EXPECT_EQ(sha256_file(dir / "w1" / name), sha256_file(dir / "w4" / name)) << name;
  }
  EXPECT_LT(seconds_since(start), 60.0);
}

// 9. Degenerate queries never reach the output.

TEST(Criterion9, EachRuleRejects) {
  const std::vector<std::string> prior = {"Who designed the bridge over the river?"};
  EXPECT_EQ(classify_degeneration("What year was it donated?", prior), Degeneration::kNone);
  EXPECT_EQ(classify_degeneration("Why?", prior), Degeneration::kTooShort);
  std::string long_query;
  for (int i = 0; i < 70; ++i) long_query += "w" + std::to_string(i) + " ";
  EXPECT_EQ(classify_degeneration(long_query, prior), Degeneration::kTooLong);
  EXPECT_EQ(classify_degeneration("so is it big is it big is it?", prior),
            Degeneration::kRepeatedNgram);
  EXPECT_EQ(classify_degeneration("who designed THE bridge over the river?", prior),
            Degeneration::kDuplicate);
  EXPECT_EQ(classify_degeneration("Who designed the bridge over the river then?", prior),
            Degeneration::kNearDuplicate);
  EXPECT_EQ(classify_degeneration("Q3: what came next?", prior), Degeneration::kFormatArtifact);
  EXPECT_EQ(classify_degeneration("ok so\nPassage: the text", prior),
            Degeneration::kFormatArtifact);
}

TEST(Criterion9, AcceptedQueriesPassARecheck) {
  const Corpus corpus = testing::fixture_corpus();
  const FewShotSet shots = testing::fixture_few_shot();
  MockBackend mock({.seed = 5, .off_topic_rate = 0.1, .degenerate_rate = 0.3});
  GenerationConfig cfg;
  cfg.switch_probability = 0.3;
  std::vector<SyntheticConversation> out;
  const GenerationReport report = generate_dataset(
      corpus, build_first_turn_template(shots), build_full_template(shots), mock, cfg, {}, 60,
      [&](const SyntheticConversation& c) { out.push_back(c); }, 2);
  ASSERT_FALSE(out.empty());
  EXPECT_GT(report.rejections.size(), 0u);
  for (const auto& c : out) {
    std::vector<std::string> prior;
    for (const auto& t : c.turns) {
      EXPECT_FALSE(is_degenerate(t.query, prior)) << t.query;
      prior.push_back(t.query);
    }
  }
}

}  // namespace
}  // namespace convgen
