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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "convgen/ranking.h"

namespace convgen {

/// Judgments of one query: passage id -> grade (>= 0).
using Judgments = std::map<std::string, int>;
/// query id -> judgments.
using Qrels = std::map<std::string, Judgments>;
/// query id -> ranked list, best first.
using Run = std::map<std::string, RankedList>;

/// TREC qrels: "qid 0 docid grade" per line. Errors name the line.
Qrels parse_qrels(std::string_view contents, const std::string& source = "qrels");
Qrels load_qrels(const std::filesystem::path& path);

/// TREC run: "qid Q0 docid rank score tag" per line. Each list is ordered by
/// score descending, then by the rank column. Throws DataError on malformed
/// lines and on a repeated (qid, docid).
Run parse_run(std::string_view contents, const std::string& source = "run");
Run load_run(const std::filesystem::path& path);

/// Writes lists in the given order with ranks 1.. and the given tag.
std::string serialize_run(std::span<const RankedList> lists, std::string_view tag);

// Per-query metrics. Binary relevance means grade >= rel_threshold. Each
// returns nullopt when the query is excluded: no relevant passage for
// MRR/recall/MAP, zero ideal DCG for NDCG.

std::optional<double> mrr_at_k(const RankedList& list, const Judgments& judged,
                               std::size_t k, int rel_threshold = 1);
std::optional<double> recall_at_k(const RankedList& list, const Judgments& judged,
                                  std::size_t k, int rel_threshold = 1);
std::optional<double> map_at_k(const RankedList& list, const Judgments& judged,
                               std::size_t k, int rel_threshold = 1);
/// Linear gain, log2(rank + 1) discount.
std::optional<double> ndcg_at_k(const RankedList& list, const Judgments& judged,
                                std::size_t k);

enum class MetricKind { kMrr, kRecall, kMap, kNdcg };

/// A metric and its cutoff; cutoff 0 means the full run depth.
struct MetricSpec {
  MetricKind kind = MetricKind::kMrr;
  std::size_t cutoff = 0;

  /// Parses "mrr", "mrr@5", "recall@5" (or "r@5"), "map@10", "ndcg@3".
  static MetricSpec parse(std::string_view name);
  /// Canonical name, e.g. "recall@5".
  std::string name() const;

  std::optional<double> compute(const RankedList& list, const Judgments& judged,
                                int rel_threshold) const;
};

struct MetricSummary {
  std::string name;
  std::optional<double> mean;  // unset when every query was excluded
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
};

struct EvalReport {
  std::vector<MetricSummary> metrics;
  /// qid -> metric name -> value, for evaluated queries.
  std::map<std::string, std::map<std::string, double>> per_query;
  std::size_t queries = 0;          // run queries that have judgments
  std::size_t unjudged_queries = 0; // run queries absent from the qrels

  /// Means rounded to 4 decimals; per-query values at full precision.
  nlohmann::json to_json() const;
  /// Aligned plain-text table of the means.
  std::string to_table() const;
};

/// Evaluates every run query that has judgments. Throws DataError
/// "no evaluable queries" when the run and qrels share no query id.
EvalReport evaluate(const Run& run, const Qrels& qrels, std::span<const MetricSpec> metrics,
                    int rel_threshold = 1);
EvalReport evaluate_run(const std::filesystem::path& run_path,
                        const std::filesystem::path& qrels_path,
                        std::span<const MetricSpec> metrics, int rel_threshold = 1);

}  // namespace convgen
