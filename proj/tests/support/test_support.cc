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


#include "test_support.h"

#include <random>
#include <set>

#include "convgen/rng.h"
#include "convgen/text.h"

namespace convgen::testing {

namespace fs = std::filesystem;

fs::path data_path(std::string_view name) { return fs::path(CONVGEN_TEST_DATA_DIR) / name; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const fs::path base = fs::temp_directory_path();
  for (;;) {
    path_ = base / ("convgen-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Passage make_passage(std::string id, std::string text, std::string doc_id, std::string title) {
  Passage p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.doc_id = std::move(doc_id);
  p.title = std::move(title);
  return p;
}

Corpus make_corpus(std::initializer_list<Passage> passages) {
  Corpus c;
  for (const auto& p : passages) c.add(p);
  return c;
}

Corpus make_corpus(const std::vector<Passage>& passages) {
  Corpus c;
  for (const auto& p : passages) c.add(p);
  return c;
}

Corpus fixture_corpus() { return load_corpus(data_path("corpus.jsonl"), CorpusFormat::kJsonl); }

FewShotSet fixture_few_shot() { return load_few_shot(data_path("few_shot.jsonl")); }

int cue_number(std::string_view prompt) {
  if (prompt.empty() || prompt.back() != ':') return 0;
  const auto nl = prompt.rfind('\n');
  std::string_view last = nl == std::string_view::npos ? prompt : prompt.substr(nl + 1);
  if (last.size() < 3 || last.front() != 'Q') return 0;
  return std::stoi(std::string(last.substr(1, last.size() - 2)));
}

std::string target_passage(std::string_view prompt) {
  const auto at = prompt.rfind("\nPassage: ");
  if (at == std::string_view::npos) return {};
  const auto start = at + 10;
  const auto end = prompt.find('\n', start);
  return std::string(prompt.substr(start, end - start));
}

std::vector<std::string> trailing_queries(std::string_view prompt) {
  std::vector<std::string> out;
  auto at = prompt.rfind("\nPassage: ");
  if (at == std::string_view::npos) return out;
  at = prompt.find('\n', at + 1);
  while (at != std::string_view::npos && at + 1 < prompt.size()) {
    const auto end = prompt.find('\n', at + 1);
    std::string_view line = prompt.substr(at + 1, end == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : end - at - 1);
    const auto colon = line.find(": ");
    if (colon != std::string_view::npos) out.emplace_back(line.substr(colon + 2));
    at = end;
  }
  return out;
}

std::string cooperative_query(std::string_view prompt, std::uint64_t sample_seed) {
  const std::uint64_t h = mix64(text::fnv1a64(prompt) ^ mix64(sample_seed));
  static const char* const kWords[] = {"river", "tower", "bridge", "museum", "harbour",
                                       "valley", "temple", "castle", "forest", "island",
                                       "market", "garden", "canal", "desert", "glacier",
                                       "volcano"};
  const std::string a = kWords[h % 16];
  const std::string b = kWords[(h >> 8) % 16];
  return "tell me about " + a + " number " + std::to_string((h >> 16) % 100000) + " and " + b +
         " item " + std::to_string((h >> 40) % 100000) + "?";
}

std::unique_ptr<ScriptedBackend> cooperative_backend() {
  return std::make_unique<ScriptedBackend>(
      [](std::string_view prompt, std::uint64_t seed) {
        return " " + cooperative_query(prompt, seed) + "\nQ" +
               std::to_string(cue_number(prompt) + 1) + ":";
      },
      "cooperative");
}

SeparableToy separable_toy(std::uint64_t seed) {
  SeparableToy toy;
  Rng rng(seed);
  constexpr int kPassages = 100;
  constexpr std::size_t kVocab = 8;
  for (int i = 0; i < kPassages; ++i) {
    std::string text;
    for (std::size_t j = 0; j < kVocab; ++j) {
      text += "w" + std::to_string(i) + "x" + std::to_string(j) + " ";
    }
    toy.corpus.add(make_passage("p" + std::to_string(i), text));
  }
  std::set<std::string> used;
  auto query = [&](int i) {
    for (;;) {
      std::vector<std::size_t> order(kVocab);
      for (std::size_t j = 0; j < kVocab; ++j) order[j] = j;
      rng.shuffle(order);
      std::sort(order.begin(), order.begin() + 3);
      std::string q;
      for (int j = 0; j < 3; ++j) {
        if (j) q += ' ';
        q += "q" + std::to_string(i) + "x" + std::to_string(order[j]);
      }
      if (used.insert(q).second) return q;
    }
  };
  for (int i = 0; i < kPassages; ++i) {
    for (int r = 0; r < 2; ++r) toy.train.push_back({query(i), "p" + std::to_string(i)});
  }
  std::vector<std::size_t> picks(kPassages);
  for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  rng.shuffle(picks);
  for (int n = 0; n < 50; ++n) {
    const int i = static_cast<int>(picks[n]);
    toy.held_out.push_back({query(i), "p" + std::to_string(i)});
  }
  return toy;
}

FilterToy adversarial_filter_toy(std::uint64_t seed) {
  FilterToy toy;
  Rng rng(seed);
  constexpr int kPassages = 100;
  constexpr std::size_t kVocab = 8;
  for (int i = 0; i < kPassages; ++i) {
    std::string text;
    for (std::size_t j = 0; j < kVocab; ++j) {
      text += "w" + std::to_string(i) + "x" + std::to_string(j) + " ";
    }
    toy.corpus.add(make_passage("p" + std::to_string(i), text));
  }
  auto query = [&](int i) {
    std::vector<std::size_t> order(kVocab);
    for (std::size_t j = 0; j < kVocab; ++j) order[j] = j;
    rng.shuffle(order);
    std::string q;
    for (int j = 0; j < 3; ++j) {
      if (j) q += ' ';
      q += "w" + std::to_string(i) + "x" + std::to_string(order[j]);
    }
    return q;
  };
  for (int i = 0; i < kPassages; ++i) {
    for (int r = 0; r < 2; ++r) {
      toy.matched.push_back({query(i), "p" + std::to_string(i)});
      // Same kind of query, but credited to a different passage.
      int j = static_cast<int>(rng.uniform_index(kPassages - 1));
      if (j >= i) ++j;
      toy.mismatched.push_back({query(i), "p" + std::to_string(j)});
    }
  }
  std::vector<std::size_t> picks(kPassages);
  for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
  rng.shuffle(picks);
  for (int n = 0; n < 50; ++n) {
    const int i = static_cast<int>(picks[n]);
    toy.held_out.push_back({query(i), "p" + std::to_string(i)});
  }
  return toy;
}

double mrr_at_5(const DualEncoderModel& model, const DenseIndex& index,
                const std::vector<TrainingPair>& queries) {
  double sum = 0.0;
  for (const auto& q : queries) {
    const RankedList hits = search(index, model.encode_query_text(q.query_context), 5);
    for (std::size_t r = 0; r < hits.entries.size(); ++r) {
      if (hits.entries[r].doc_id == q.positive_id) {
        sum += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return sum / static_cast<double>(queries.size());
}

}  // namespace convgen::testing
