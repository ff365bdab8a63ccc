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


#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "convgen/dense_index.h"
#include "convgen/eval.h"
#include "convgen/features.h"
#include "convgen/model.h"
#include "convgen/rng.h"
#include "convgen/training.h"

namespace convgen {
namespace {

std::string random_text(Rng& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) s += "w" + std::to_string(rng.uniform_index(5000)) + " ";
  return s;
}

Corpus random_corpus(std::size_t n) {
  Rng rng(1);
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.add({"p" + std::to_string(i), "", "", random_text(rng, 120)});
  }
  return corpus;
}

void BM_Featurize(benchmark::State& state) {
  Rng rng(2);
  const std::string text = random_text(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(featurize(text));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Featurize)->Arg(16)->Arg(128)->Arg(512);

void BM_Search(benchmark::State& state) {
  const Corpus corpus = random_corpus(static_cast<std::size_t>(state.range(0)));
  const DualEncoderModel model = DualEncoderModel::random(128, 3);
  const DenseIndex index = build_index(model, corpus);
  Rng rng(4);
  const Embedding q = model.encode_query_text(random_text(rng, 12));
  for (auto _ : state) benchmark::DoNotOptimize(search(index, q, 10));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Search)->Arg(1000)->Arg(10000);

void BM_InBatchLoss(benchmark::State& state) {
  const std::size_t b = static_cast<std::size_t>(state.range(0));
  const DualEncoderModel model = DualEncoderModel::random(128, 5);
  Rng rng(6);
  std::vector<FeatureVector> qs, ps;
  for (std::size_t i = 0; i < b; ++i) {
    qs.push_back(featurize(random_text(rng, 20)));
    ps.push_back(featurize(random_text(rng, 120)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(in_batch_loss(model, qs, ps));
}
BENCHMARK(BM_InBatchLoss)->Arg(16)->Arg(64);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(7);
  Run run;
  Qrels qrels;
  for (int q = 0; q < 1000; ++q) {
    const std::string qid = "q" + std::to_string(q);
    RankedList& list = run[qid];
    list.query_id = qid;
    for (int r = 0; r < 100; ++r) {
      list.entries.push_back({"d" + std::to_string(rng.uniform_index(500)) + "_" +
                                  std::to_string(r),
                              100.0 - r});
    }
    for (int j = 0; j < 5; ++j) qrels[qid][list.entries[rng.uniform_index(100)].doc_id] = 1;
  }
  std::vector<MetricSpec> metrics;
  for (const char* m : {"mrr@5", "recall@5", "map@10", "ndcg@10"}) {
    metrics.push_back(MetricSpec::parse(m));
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(run, qrels, metrics));
}
BENCHMARK(BM_Evaluate);

}  // namespace
}  // namespace convgen

BENCHMARK_MAIN();
