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

#include "convgen/generator.h"

#include <exception>

#include "convgen/error.h"
#include "convgen/parallel.h"
#include "convgen/text.h"

namespace convgen {
namespace {

using nlohmann::json;

// Slots run per parallel wave; results of a wave reach the sink before the
// next wave starts, which bounds memory and preserves partial output.
constexpr std::size_t kSlotsPerWorkerPerWave = 8;

}  // namespace

void GenerationConfig::validate() const {
  if (turns_per_conversation < 1) {
    throw ValidationError("generation.turns_per_conversation must be >= 1");
  }
  if (!(switch_probability >= 0.0 && switch_probability <= 1.0)) {
    throw ValidationError("generation.p_ps must be in [0, 1]");
  }
  if (max_regeneration_attempts < 0) {
    throw ValidationError("generation.max_regeneration_attempts must be >= 0");
  }
  degeneration.validate();
}

json SyntheticConversation::to_json() const {
  json turns_json = json::array();
  for (const auto& t : turns) {
    turns_json.push_back(
        {{"query", t.query}, {"passage_id", t.passage_id}, {"switched", t.switched}});
  }
  return {{"turns", std::move(turns_json)},
          {"seed", seed},
          {"backend", backend},
          {"template_fingerprint", template_fingerprint}};
}

SyntheticConversation SyntheticConversation::from_json(const json& j) {
  SyntheticConversation c;
  for (const auto& t : j.at("turns")) {
    c.turns.push_back({t.at("query").get<std::string>(),
                       t.at("passage_id").get<std::string>(),
                       t.value("switched", false)});
  }
  c.seed = j.value("seed", std::uint64_t{0});
  c.backend = j.value("backend", std::string());
  c.template_fingerprint = j.value("template_fingerprint", std::string());
  return c;
}

std::pair<const Passage*, bool> switch_passage(const Passage& current,
                                               const Corpus& corpus,
                                               double probability, Rng& rng) {
  const bool draw = rng.bernoulli(probability);
  if (!draw || corpus.size() < 2) return {&current, false};
  return {&related_passage(corpus, current, rng), true};
}

ConversationOutcome generate_conversation(const Corpus& corpus,
                                          const Template& first_turn,
                                          const Template& full,
                                          CompletionBackend& backend,
                                          const GenerationConfig& config,
                                          const DecodingParams& params,
                                          std::uint64_t conversation_index,
                                          const PromptObserver& observer) {
  if (first_turn.kind() != TemplateKind::kFirstTurn) {
    throw ValidationError("generate_conversation: first template must be first_turn");
  }
  if (full.kind() != TemplateKind::kFull) {
    throw ValidationError("generate_conversation: follow-up template must be full");
  }
  if (corpus.empty()) throw DataError("generate_conversation: empty corpus");

  const std::uint64_t conv_seed = mix64(config.seed ^ mix64(conversation_index));
  Rng rng(conv_seed);

  ConversationOutcome out;
  SyntheticConversation conv;
  conv.seed = conv_seed;
  conv.backend = backend.name();
  conv.template_fingerprint =
      text::hex64(text::fnv1a64(first_turn.fingerprint() + full.fingerprint()));

  const Passage* passage = &sample_passage(corpus, rng);
  std::vector<std::string> queries;

  for (int turn = 1; turn <= config.turns_per_conversation; ++turn) {
    bool switched = false;
    if (turn >= 2) {
      auto [next, did_switch] =
          switch_passage(*passage, corpus, config.switch_probability, rng);
      passage = next;
      switched = did_switch;
      ++out.switch_opportunities;
      if (switched) ++out.switches;
    }
    const Template& tmpl = turn == 1 ? first_turn : full;
    const std::string prompt = render_prompt(tmpl, *passage, queries);

    std::optional<std::string> accepted;
    for (int attempt = 0; attempt <= config.max_regeneration_attempts; ++attempt) {
      if (observer) observer(turn, prompt);
      const std::uint64_t sample_seed = rng.next();
      ++out.backend_calls;
      std::string candidate(text::trim(backend.complete(prompt, params, sample_seed)));
      const Degeneration verdict =
          classify_degeneration(candidate, queries, config.degeneration);
      if (verdict == Degeneration::kNone) {
        accepted = std::move(candidate);
        break;
      }
      ++out.rejections[std::string(to_string(verdict))];
    }

    if (!accepted) {
      if (turn == 1) {
        out.discard_reason = kDiscardDegenerateFirstTurn;
        return out;
      }
      // The switch drawn for this turn never produced a query.
      --out.switch_opportunities;
      if (switched) --out.switches;
      out.truncated = true;
      break;
    }
    queries.push_back(*accepted);
    conv.turns.push_back({std::move(*accepted), passage->id, switched});
  }
  out.conversation = std::move(conv);
  return out;
}

double GenerationReport::switch_rate() const {
  return switch_opportunities == 0
             ? 0.0
             : static_cast<double>(switches) / static_cast<double>(switch_opportunities);
}

double GenerationReport::mean_turns() const {
  return emitted == 0 ? 0.0 : static_cast<double>(turns) / static_cast<double>(emitted);
}

json GenerationReport::to_json() const {
  std::size_t discarded = 0;
  for (const auto& [_, n] : discards) discarded += n;
  json j = {{"requested", requested},
            {"attempted", attempted},
            {"emitted", emitted},
            {"discarded", discarded},
            {"discards", discards},
            {"truncated", truncated},
            {"turns", turns},
            {"mean_turns", mean_turns()},
            {"backend_calls", backend_calls},
            {"switches", switches},
            {"switch_opportunities", switch_opportunities},
            {"switch_rate", switch_rate()},
            {"rejections", rejections},
            {"aborted", aborted}};
  if (aborted) j["abort_reason"] = abort_reason;
  return j;
}

GenerationReport generate_dataset(
    const Corpus& corpus, const Template& first_turn, const Template& full,
    CompletionBackend& backend, const GenerationConfig& config,
    const DecodingParams& params, std::size_t n_conversations,
    const ConversationSink& sink, int workers,
    const std::function<void(const GenerationReport&)>& on_abort) {
  if (n_conversations < 1) throw ValidationError("n_conversations must be >= 1");
  config.validate();
  params.validate();

  GenerationReport report;
  report.requested = n_conversations;

  const std::size_t wave =
      kSlotsPerWorkerPerWave * static_cast<std::size_t>(std::max(1, workers));
  for (std::size_t start = 0; start < n_conversations; start += wave) {
    const std::size_t stop = std::min(n_conversations, start + wave);
    std::vector<ConversationOutcome> outcomes(stop - start);
    std::vector<std::exception_ptr> failures(stop - start);
    parallel_for(start, stop, workers, [&](std::size_t i) {
      try {
        outcomes[i - start] = generate_conversation(corpus, first_turn, full,
                                                    backend, config, params, i);
      } catch (const BackendError&) {
        failures[i - start] = std::current_exception();
      }
    });

    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      if (failures[k]) {
        report.aborted = true;
        try {
          std::rethrow_exception(failures[k]);
        } catch (const BackendError& e) {
          report.abort_reason = e.what();
        }
        if (on_abort) on_abort(report);
        std::rethrow_exception(failures[k]);
      }
      const ConversationOutcome& o = outcomes[k];
      ++report.attempted;
      report.backend_calls += static_cast<std::size_t>(o.backend_calls);
      report.switches += static_cast<std::size_t>(o.switches);
      report.switch_opportunities += static_cast<std::size_t>(o.switch_opportunities);
      for (const auto& [rule, n] : o.rejections) {
        report.rejections[rule] += static_cast<std::size_t>(n);
      }
      if (!o.conversation) {
        ++report.discards[o.discard_reason];
        continue;
      }
      if (o.truncated) ++report.truncated;
      ++report.emitted;
      report.turns += o.conversation->turns.size();
      sink(*o.conversation);
    }
  }
  return report;
}

}  // namespace convgen
