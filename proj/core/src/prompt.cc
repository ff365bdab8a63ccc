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

#include "convgen/prompt.h"

#include <nlohmann/json.hpp>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/text.h"

namespace convgen {
namespace {

using nlohmann::json;

void append_passage_header(std::string& out, const Passage& p,
                           std::size_t budget) {
  out += "Title: ";
  out += text::single_line(p.title);
  out += "\nPassage: ";
  out += text::truncate_at_whitespace(text::single_line(p.text), budget);
  out += '\n';
}

void append_query(std::string& out, std::size_t index, std::string_view q) {
  out += 'Q';
  out += std::to_string(index);
  out += ": ";
  out += text::single_line(q);
  out += '\n';
}

Passage parse_passage(const json& obj, std::size_t line_no) {
  Passage p;
  auto str = [&](const char* key, bool required) -> std::string {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) {
        throw DataError("line " + std::to_string(line_no) +
                        ": passage is missing \"" + key + "\"");
      }
      return {};
    }
    return it->get<std::string>();
  };
  p.id = str("id", false);
  p.doc_id = str("doc_id", false);
  p.title = str("title", false);
  p.text = str("text", true);
  return p;
}

}  // namespace

void FewShotSet::validate() const {
  if (examples.empty()) throw ValidationError("few-shot set is empty");
  if (examples.size() > kMaxFewShotExamples) {
    throw ValidationError("few-shot set has " + std::to_string(examples.size()) +
                          " examples; at most " +
                          std::to_string(kMaxFewShotExamples) + " are allowed");
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].turns.empty()) {
      throw ValidationError("few-shot example " + std::to_string(i + 1) +
                            " has no turns");
    }
    for (const auto& t : examples[i].turns) {
      if (text::trim(t.query).empty()) {
        throw ValidationError("few-shot example " + std::to_string(i + 1) +
                              " has an empty query");
      }
    }
  }
}

FewShotSet load_few_shot(const std::filesystem::path& path,
                         const Corpus* corpus) {
  const std::string contents = read_file(path);
  FewShotSet set;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string::npos) nl = contents.size();
    std::string_view line(contents.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + ": line " + std::to_string(line_no);
    try {
      json obj = json::parse(line);
      ExampleConversation conv;
      for (const json& turn : obj.at("turns")) {
        ExampleTurn t;
        t.query = turn.at("query").get<std::string>();
        if (turn.contains("passage")) {
          t.passage = parse_passage(turn.at("passage"), line_no);
        } else if (turn.contains("passage_id")) {
          if (corpus == nullptr) {
            throw DataError("passage_id given but no corpus to resolve it");
          }
          t.passage = corpus->get(turn.at("passage_id").get<std::string>());
        } else {
          throw DataError("turn needs \"passage\" or \"passage_id\"");
        }
        conv.turns.push_back(std::move(t));
      }
      set.examples.push_back(std::move(conv));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  set.validate();
  return set;
}

std::string_view to_string(TemplateKind kind) {
  return kind == TemplateKind::kFull ? "full" : "first_turn";
}

Template::Template(TemplateKind kind, std::string text, std::size_t demo_count,
                   std::size_t passage_char_budget)
    : kind_(kind),
      text_(std::move(text)),
      demo_count_(demo_count),
      passage_char_budget_(passage_char_budget) {}

std::string Template::fingerprint() const {
  std::string keyed(to_string(kind_));
  keyed += '\x1f';
  keyed += text_;
  return text::hex64(text::fnv1a64(keyed));
}

void Template::save(const std::filesystem::path& path) const {
  write_file(path, text_);
}

Template Template::load(const std::filesystem::path& path, TemplateKind kind,
                        std::size_t passage_char_budget) {
  std::string body = read_file(path);
  std::size_t blocks = 0;
  std::size_t pos = 0;
  while ((pos = body.find("Title: ", pos)) != std::string::npos) {
    if (pos == 0 || body[pos - 1] == '\n') ++blocks;
    pos += 7;
  }
  if (blocks == 0) throw DataError(path.string() + ": no demonstration blocks");
  return Template(kind, std::move(body), blocks, passage_char_budget);
}

Template build_full_template(const FewShotSet& examples,
                             std::size_t passage_char_budget) {
  examples.validate();
  std::string out;
  for (std::size_t i = 0; i < examples.examples.size(); ++i) {
    const auto& turns = examples.examples[i].turns;
    if (i > 0) out += '\n';
    // The last turn's passage anchors the block.
    append_passage_header(out, turns.back().passage, passage_char_budget);
    for (std::size_t t = 0; t < turns.size(); ++t) {
      append_query(out, t + 1, turns[t].query);
    }
  }
  return Template(TemplateKind::kFull, std::move(out), examples.examples.size(),
                  passage_char_budget);
}

Template build_first_turn_template(const FewShotSet& examples,
                                   std::size_t passage_char_budget) {
  examples.validate();
  std::string out;
  for (std::size_t i = 0; i < examples.examples.size(); ++i) {
    const auto& first = examples.examples[i].turns.front();
    if (i > 0) out += '\n';
    append_passage_header(out, first.passage, passage_char_budget);
    append_query(out, 1, first.query);
  }
  return Template(TemplateKind::kFirstTurn, std::move(out),
                  examples.examples.size(), passage_char_budget);
}

std::string render_prompt(const Template& tmpl, const Passage& target,
                          const std::vector<std::string>& prior_queries) {
  if (tmpl.kind() == TemplateKind::kFirstTurn && !prior_queries.empty()) {
    throw ValidationError(
        "first-turn template cannot render a prompt with prior queries");
  }
  std::string out = tmpl.text();
  out += '\n';
  append_passage_header(out, target, tmpl.passage_char_budget());
  for (std::size_t i = 0; i < prior_queries.size(); ++i) {
    append_query(out, i + 1, prior_queries[i]);
  }
  out += 'Q';
  out += std::to_string(prior_queries.size() + 1);
  out += ':';
  return out;
}

}  // namespace convgen
