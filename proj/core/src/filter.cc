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


#include "convgen/filter.h"

#include "convgen/error.h"
#include "convgen/parallel.h"

namespace convgen {

void FilterConfig::validate() const {
  if (top_k < 1) throw ValidationError("filter.top_k must be >= 1");
  if (initial_train) initial_train->validate();
}

nlohmann::json FilterReport::to_json() const {
  nlohmann::json hist = nlohmann::json::object();
  for (std::size_t r = 0; r < rank_histogram.size(); ++r) {
    hist[std::to_string(r + 1)] = rank_histogram[r];
  }
  hist["miss"] = miss;
  return {{"input", input}, {"kept", kept}, {"dropped", dropped},
          {"top_k", top_k}, {"rank_histogram", hist}};
}

std::vector<TrainingPair> pairs_from_conversations(
    std::span<const SyntheticConversation> conversations, const Corpus& corpus) {
  std::vector<TrainingPair> pairs;
  for (std::size_t c = 0; c < conversations.size(); ++c) {
    std::vector<std::string> history;
    const auto& turns = conversations[c].turns;
    for (std::size_t t = 0; t < turns.size(); ++t) {
      if (!corpus.find(turns[t].passage_id)) {
        throw DataError("conversation " + std::to_string(c + 1) + ", turn " +
                        std::to_string(t + 1) + ": unknown passage id \"" +
                        turns[t].passage_id + "\"");
      }
      history.push_back(turns[t].query);
      pairs.push_back({join_history(history), turns[t].passage_id});
    }
  }
  return pairs;
}

FilterResult filter_with_model(std::span<const TrainingPair> pairs,
                               const DualEncoderModel& model, const DenseIndex& index,
                               std::size_t top_k, int workers) {
  if (top_k < 1) throw ValidationError("filter.top_k must be >= 1");
  FilterResult out;
  out.ranks.assign(pairs.size(), 0);
  parallel_for(0, pairs.size(), workers, [&](std::size_t i) {
    const RankedList hits =
        search(index, model.encode_query_text(pairs[i].query_context), top_k);
    for (std::size_t r = 0; r < hits.entries.size(); ++r) {
      if (hits.entries[r].doc_id == pairs[i].positive_id) {
        out.ranks[i] = r + 1;
        break;
      }
    }
  });

  FilterReport& report = out.report;
  report.input = pairs.size();
  report.top_k = top_k;
  report.rank_histogram.assign(top_k, 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (out.ranks[i] > 0) {
      ++report.rank_histogram[out.ranks[i] - 1];
      out.kept.push_back(pairs[i]);
    } else {
      ++report.miss;
      out.dropped.push_back(pairs[i]);
    }
  }
  report.kept = out.kept.size();
  report.dropped = out.dropped.size();
  return out;
}

FilterResult consistency_filter(std::span<const TrainingPair> pairs, const Corpus& corpus,
                                const FilterConfig& config, const TrainConfig& train_config,
                                int workers, std::optional<DualEncoderModel>* initial_model) {
  config.validate();
  if (pairs.empty()) throw ValidationError("consistency filter: no pairs to filter");
  const TrainConfig& tc = config.initial_train ? *config.initial_train : train_config;
  TrainResult initial = train(pairs, corpus, tc);
  const DenseIndex index = build_index(initial.model, corpus, workers);
  FilterResult out = filter_with_model(pairs, initial.model, index, config.top_k, workers);
  if (initial_model) *initial_model = std::move(initial.model);
  return out;
}

}  // namespace convgen
