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

#include "convgen/corpus.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <limits>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/text.h"

namespace convgen {
namespace {

using nlohmann::json;

std::string line_prefix(std::size_t line_no) {
  return "line " + std::to_string(line_no) + ": ";
}

std::string required_string(const json& obj, const char* key,
                            std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError(line_prefix(line_no) + "missing required field \"" + key +
                    "\"");
  }
  if (!it->is_string()) {
    throw DataError(line_prefix(line_no) + "field \"" + key +
                    "\" must be a string");
  }
  return it->get<std::string>();
}

std::string optional_string(const json& obj, const char* key,
                            std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw DataError(line_prefix(line_no) + "field \"" + key +
                    "\" must be a string");
  }
  return it->get<std::string>();
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

// Runs `fn(line, line_no)` on every non-blank line.
template <typename Fn>
void for_each_line(std::string_view contents, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = nl + 1;
    if (text::trim(line).empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "tsv") return CorpusFormat::kTsv;
  throw ValidationError("unknown corpus format \"" + std::string(name) +
                        "\" (expected jsonl or tsv)");
}

void Corpus::add(Passage p) {
  if (p.id.empty()) throw DataError("passage id must be nonempty");
  if (text::trim(p.text).empty()) {
    throw DataError("passage \"" + p.id + "\" has empty text");
  }
  if (by_id_.count(p.id)) throw DataError("duplicate passage id \"" + p.id + "\"");
  if (p.doc_id.empty()) p.doc_id = p.id;
  const std::size_t pos = passages_.size();
  by_id_.emplace(p.id, pos);
  by_doc_[p.doc_id].push_back(pos);
  passages_.push_back(std::move(p));
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Passage& Corpus::get(std::string_view id) const {
  return passages_[position_of(id)];
}

std::size_t Corpus::position_of(std::string_view id) const {
  auto pos = find(id);
  if (!pos) throw DataError("unknown passage id \"" + std::string(id) + "\"");
  return *pos;
}

const std::vector<std::size_t>& Corpus::document(std::string_view doc_id) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_doc_.find(std::string(doc_id));
  return it == by_doc_.end() ? kEmpty : it->second;
}

Corpus parse_corpus(std::string_view contents, CorpusFormat format) {
  Corpus corpus;
  for_each_line(contents, [&](std::string_view line, std::size_t line_no) {
    if (!text::is_valid_utf8(line)) {
      throw DataError(line_prefix(line_no) + "invalid UTF-8");
    }
    Passage p;
    if (format == CorpusFormat::kJsonl) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::parse_error& e) {
        throw DataError(line_prefix(line_no) + "malformed JSON: " + e.what());
      }
      if (!obj.is_object()) {
        throw DataError(line_prefix(line_no) + "expected a JSON object");
      }
      p.id = required_string(obj, "id", line_no);
      p.text = required_string(obj, "text", line_no);
      p.doc_id = optional_string(obj, "doc_id", line_no);
      p.title = optional_string(obj, "title", line_no);
    } else {
      auto cols = split_tabs(line);
      if (cols.size() != 4) {
        throw DataError(line_prefix(line_no) + "expected 4 tab-separated " +
                        "columns (id, doc_id, title, text), got " +
                        std::to_string(cols.size()));
      }
      p.id = std::string(cols[0]);
      p.doc_id = std::string(cols[1]);
      p.title = std::string(cols[2]);
      p.text = std::string(cols[3]);
      if (p.id.empty()) {
        throw DataError(line_prefix(line_no) + "missing required field \"id\"");
      }
    }
    try {
      corpus.add(std::move(p));
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
  });
  if (corpus.empty()) throw DataError("empty corpus: no passages found");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path)) {
    throw DataError("corpus file not found: " + path.string());
  }
  try {
    return parse_corpus(read_file(path), format);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format) {
  std::string out;
  for (const Passage& p : corpus) {
    if (format == CorpusFormat::kJsonl) {
      json obj = {{"id", p.id}, {"doc_id", p.doc_id}, {"title", p.title},
                  {"text", p.text}};
      out += obj.dump();
    } else {
      for (const std::string* f : {&p.id, &p.doc_id, &p.title, &p.text}) {
        if (f->find_first_of("\t\r\n") != std::string::npos) {
          throw DataError("passage \"" + p.id +
                          "\" has a tab or newline; cannot write as TSV");
        }
      }
      out += p.id + '\t' + p.doc_id + '\t' + p.title + '\t' + p.text;
    }
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format) {
  write_file(path, serialize_corpus(corpus, format));
}

const Passage& sample_passage(const Corpus& corpus, Rng& rng) {
  if (corpus.empty()) throw DataError("cannot sample from an empty corpus");
  return corpus.at(rng.uniform_index(corpus.size()));
}

const Passage& related_passage(const Corpus& corpus, const Passage& current,
                               Rng& rng) {
  if (corpus.size() < 2) {
    throw DataError("related_passage needs a corpus of at least 2 passages");
  }
  const std::size_t cur = corpus.position_of(current.id);

  // Same document: nearest neighbour in corpus position.
  const auto& siblings = corpus.document(corpus.at(cur).doc_id);
  if (siblings.size() > 1) {
    std::optional<std::size_t> before;
    std::optional<std::size_t> after;
    for (std::size_t pos : siblings) {
      if (pos < cur) before = pos;  // siblings are ascending
      if (pos > cur && !after) after = pos;
    }
    if (before && after) {
      const std::size_t db = cur - *before;
      const std::size_t da = *after - cur;
      if (da < db) return corpus.at(*after);
      if (db < da) return corpus.at(*before);
      return corpus.at(rng.bernoulli(0.5) ? *before : *after);
    }
    return corpus.at(after ? *after : *before);
  }

  // Sole passage of its document: lexical overlap fallback.
  const auto cur_tokens = text::split_whitespace(text::to_lower(current.text));
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_score = -1.0;
  for (std::size_t pos = 0; pos < corpus.size(); ++pos) {
    if (pos == cur) continue;
    const double score = text::jaccard(
        cur_tokens, text::split_whitespace(text::to_lower(corpus.at(pos).text)));
    if (score > best_score) {
      best_score = score;
      best = pos;
    }
  }
  return corpus.at(best);
}

}  // namespace convgen
