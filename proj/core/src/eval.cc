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


#include "convgen/eval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/text.h"

namespace convgen {
namespace {

template <typename Fn>
void for_each_line(std::string_view contents, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    ++line_no;
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    if (!text::trim(line).empty()) fn(line_no, line);
  }
}

bool parse_int(std::string_view s, long long& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::size_t depth(const RankedList& list, std::size_t k) {
  const std::size_t n = list.entries.size();
  return k == 0 ? n : std::min(k, n);
}

int grade_of(const Judgments& judged, const std::string& doc) {
  auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

std::size_t relevant_count(const Judgments& judged, int rel_threshold) {
  std::size_t n = 0;
  for (const auto& [doc, grade] : judged) {
    if (grade >= rel_threshold) ++n;
  }
  return n;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

Qrels parse_qrels(std::string_view contents, const std::string& source) {
  Qrels qrels;
  for_each_line(contents, [&](std::size_t line_no, std::string_view line) {
    const std::string where = source + ": line " + std::to_string(line_no) + ": ";
    const auto f = text::split_whitespace(line);
    if (f.size() != 4) {
      throw DataError(where + "expected \"qid 0 docid grade\", got " +
                      std::to_string(f.size()) + " fields");
    }
    long long grade = 0;
    if (!parse_int(f[3], grade) || grade < 0 || grade > 1'000'000) {
      throw DataError(where + "grade must be a nonnegative integer, got \"" + f[3] + "\"");
    }
    auto [it, inserted] = qrels[f[0]].emplace(f[2], static_cast<int>(grade));
    if (!inserted) {
      throw DataError(where + "duplicate judgment for (" + f[0] + ", " + f[2] + ")");
    }
  });
  return qrels;
}

Qrels load_qrels(const std::filesystem::path& path) {
  return parse_qrels(read_file(path), path.string());
}

Run parse_run(std::string_view contents, const std::string& source) {
  struct Row {
    std::string doc;
    long long rank;
    double score;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_line(contents, [&](std::size_t line_no, std::string_view line) {
    const std::string where = source + ": line " + std::to_string(line_no) + ": ";
    const auto f = text::split_whitespace(line);
    if (f.size() != 6) {
      throw DataError(where + "expected \"qid Q0 docid rank score tag\", got " +
                      std::to_string(f.size()) + " fields");
    }
    Row row{f[2], 0, 0.0};
    if (!parse_int(f[3], row.rank)) {
      throw DataError(where + "rank is not an integer: \"" + f[3] + "\"");
    }
    if (!parse_double(f[4], row.score)) {
      throw DataError(where + "score is not a finite number: \"" + f[4] + "\"");
    }
    if (!seen.emplace(f[0], f[2]).second) {
      throw DataError(where + "duplicate (qid, docid) (" + f[0] + ", " + f[2] + ")");
    }
    rows[f[0]].push_back(std::move(row));
  });
  Run run;
  for (auto& [qid, list] : rows) {
    std::stable_sort(list.begin(), list.end(), [](const Row& a, const Row& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.rank < b.rank;
    });
    RankedList ranked;
    ranked.query_id = qid;
    for (auto& r : list) ranked.entries.push_back({std::move(r.doc), r.score});
    run.emplace(qid, std::move(ranked));
  }
  return run;
}

Run load_run(const std::filesystem::path& path) {
  return parse_run(read_file(path), path.string());
}

std::string serialize_run(std::span<const RankedList> lists, std::string_view tag) {
  std::string out;
  char score[64];
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      std::snprintf(score, sizeof(score), "%.17g", list.entries[r].score);
      out += list.query_id;
      out += " Q0 ";
      out += list.entries[r].doc_id;
      out += ' ';
      out += std::to_string(r + 1);
      out += ' ';
      out += score;
      out += ' ';
      out += tag;
      out += '\n';
    }
  }
  return out;
}

std::optional<double> mrr_at_k(const RankedList& list, const Judgments& judged,
                               std::size_t k, int rel_threshold) {
  if (relevant_count(judged, rel_threshold) == 0) return std::nullopt;
  const std::size_t n = depth(list, k);
  for (std::size_t i = 0; i < n; ++i) {
    if (grade_of(judged, list.entries[i].doc_id) >= rel_threshold) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

std::optional<double> recall_at_k(const RankedList& list, const Judgments& judged,
                                  std::size_t k, int rel_threshold) {
  const std::size_t relevant = relevant_count(judged, rel_threshold);
  if (relevant == 0) return std::nullopt;
  const std::size_t n = depth(list, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grade_of(judged, list.entries[i].doc_id) >= rel_threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant);
}

std::optional<double> map_at_k(const RankedList& list, const Judgments& judged,
                               std::size_t k, int rel_threshold) {
  const std::size_t relevant = relevant_count(judged, rel_threshold);
  if (relevant == 0) return std::nullopt;
  const std::size_t n = depth(list, k);
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grade_of(judged, list.entries[i].doc_id) >= rel_threshold) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(relevant);
}

std::optional<double> ndcg_at_k(const RankedList& list, const Judgments& judged,
                                std::size_t k) {
  const std::size_t n = depth(list, k);
  const std::size_t cutoff = k == 0 ? n : k;
  std::vector<int> ideal;
  for (const auto& [doc, grade] : judged) {
    if (grade > 0) ideal.push_back(grade);
  }
  std::sort(ideal.rbegin(), ideal.rend());
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(cutoff, ideal.size()); ++i) {
    idcg += ideal[i] / std::log2(static_cast<double>(i + 2));
  }
  if (idcg <= 0.0) return std::nullopt;
  double dcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dcg += grade_of(judged, list.entries[i].doc_id) / std::log2(static_cast<double>(i + 2));
  }
  return dcg / idcg;
}

MetricSpec MetricSpec::parse(std::string_view name) {
  const std::string lower = text::to_lower(text::trim(name));
  std::string_view base = lower;
  std::size_t cutoff = 0;
  const auto at = lower.find('@');
  if (at != std::string::npos) {
    base = std::string_view(lower).substr(0, at);
    long long k = 0;
    if (!parse_int(std::string_view(lower).substr(at + 1), k) || k < 1) {
      throw ValidationError("metric \"" + std::string(name) + "\": cutoff must be >= 1");
    }
    cutoff = static_cast<std::size_t>(k);
  }
  MetricSpec spec;
  spec.cutoff = cutoff;
  if (base == "mrr") {
    spec.kind = MetricKind::kMrr;
  } else if (base == "recall" || base == "r") {
    spec.kind = MetricKind::kRecall;
  } else if (base == "map") {
    spec.kind = MetricKind::kMap;
  } else if (base == "ndcg") {
    spec.kind = MetricKind::kNdcg;
  } else {
    throw ValidationError("unknown metric \"" + std::string(name) +
                          "\" (expected mrr, recall, map or ndcg, optionally @k)");
  }
  return spec;
}

std::string MetricSpec::name() const {
  std::string base;
  switch (kind) {
    case MetricKind::kMrr: base = "mrr"; break;
    case MetricKind::kRecall: base = "recall"; break;
    case MetricKind::kMap: base = "map"; break;
    case MetricKind::kNdcg: base = "ndcg"; break;
  }
  return cutoff == 0 ? base : base + "@" + std::to_string(cutoff);
}

std::optional<double> MetricSpec::compute(const RankedList& list, const Judgments& judged,
                                          int rel_threshold) const {
  switch (kind) {
    case MetricKind::kMrr: return mrr_at_k(list, judged, cutoff, rel_threshold);
    case MetricKind::kRecall: return recall_at_k(list, judged, cutoff, rel_threshold);
    case MetricKind::kMap: return map_at_k(list, judged, cutoff, rel_threshold);
    case MetricKind::kNdcg: return ndcg_at_k(list, judged, cutoff);
  }
  return std::nullopt;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json means = nlohmann::json::object();
  nlohmann::json excluded = nlohmann::json::object();
  nlohmann::json evaluated = nlohmann::json::object();
  for (const auto& m : metrics) {
    means[m.name] = m.mean ? nlohmann::json(round4(*m.mean)) : nlohmann::json(nullptr);
    evaluated[m.name] = m.evaluated;
    excluded[m.name] = m.excluded;
  }
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [qid, values] : per_query) per[qid] = values;
  return {{"queries", queries},   {"unjudged_queries", unjudged_queries},
          {"metrics", means},     {"evaluated", evaluated},
          {"excluded", excluded}, {"per_query", per}};
}

std::string EvalReport::to_table() const {
  std::size_t width = 6;
  for (const auto& m : metrics) width = std::max(width, m.name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %8s  %9s  %8s\n", static_cast<int>(width), "metric",
                "mean", "evaluated", "excluded");
  out += buf;
  for (const auto& m : metrics) {
    char mean[32];
    if (m.mean) {
      std::snprintf(mean, sizeof(mean), "%.4f", round4(*m.mean));
    } else {
      std::snprintf(mean, sizeof(mean), "n/a");
    }
    std::snprintf(buf, sizeof(buf), "%-*s  %8s  %9zu  %8zu\n", static_cast<int>(width),
                  m.name.c_str(), mean, m.evaluated, m.excluded);
    out += buf;
  }
  return out;
}

EvalReport evaluate(const Run& run, const Qrels& qrels, std::span<const MetricSpec> metrics,
                    int rel_threshold) {
  if (metrics.empty()) throw ValidationError("evaluate: no metrics requested");
  EvalReport report;
  for (const auto& spec : metrics) report.metrics.push_back({spec.name(), std::nullopt, 0, 0});
  std::vector<double> sums(metrics.size(), 0.0);
  for (const auto& [qid, list] : run) {
    auto judged = qrels.find(qid);
    if (judged == qrels.end()) {
      ++report.unjudged_queries;
      for (auto& m : report.metrics) ++m.excluded;
      continue;
    }
    ++report.queries;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const auto value = metrics[m].compute(list, judged->second, rel_threshold);
      if (!value) {
        ++report.metrics[m].excluded;
        continue;
      }
      ++report.metrics[m].evaluated;
      sums[m] += *value;
      report.per_query[qid][report.metrics[m].name] = *value;
    }
  }
  if (report.queries == 0) throw DataError("no evaluable queries");
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    if (report.metrics[m].evaluated > 0) {
      report.metrics[m].mean = sums[m] / static_cast<double>(report.metrics[m].evaluated);
    }
  }
  return report;
}

EvalReport evaluate_run(const std::filesystem::path& run_path,
                        const std::filesystem::path& qrels_path,
                        std::span<const MetricSpec> metrics, int rel_threshold) {
  return evaluate(load_run(run_path), load_qrels(qrels_path), metrics, rel_threshold);
}

}  // namespace convgen
