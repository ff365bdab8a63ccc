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

#include <cstdint>
#include <map>
#include <set>
#include <type_traits>

#include "convgen/error.h"
#include "convgen/eval.h"
#include "convgen/hashing.h"

namespace convgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Walks one JSON object, reading typed fields and rejecting unknown keys.
class Section {
 public:
  Section(const json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node.is_object()) throw ValidationError(label() + ": expected an object");
  }

  bool has(const char* key) const { return node_->contains(key); }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    auto it = node_->find(key);
    if (it == node_->end() || it->is_null()) return;
    const json& v = *it;
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      ok = v.is_string();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_string();
    }
    if (!ok) throw ValidationError(key_label(key) + ": wrong type (" + v.type_name() + ")");
    out = v.get<T>();
  }

  void read_path(const char* key, fs::path& out, const fs::path& base) {
    std::string s;
    read(key, s);
    if (!s.empty()) out = resolve(base, s);
  }

  Section child(const char* key) {
    used_.insert(key);
    static const json kEmpty = json::object();
    auto it = node_->find(key);
    if (it == node_->end() || it->is_null()) return Section(kEmpty, key_label(key));
    return Section(*it, key_label(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) throw ValidationError("unknown config key \"" + key_label(key) + "\"");
    }
  }

  static fs::path resolve(const fs::path& base, const std::string& s) {
    fs::path p(s);
    return p.is_absolute() || base.empty() ? p : base / p;
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  std::string key_label(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* node_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

TrainConfig read_train(Section s, const TrainConfig& base) {
  TrainConfig c = base;
  s.read("batch_size", c.batch_size);
  s.read("learning_rate", c.learning_rate);
  s.read("epochs", c.epochs);
  s.read("seed", c.seed);
  s.read("embedding_dim", c.embedding_dim);
  s.read("init_scale", c.init_scale);
  s.read("tied_init", c.tied_init);
  s.read("max_grad_norm", c.max_grad_norm);
  s.finish();
  return c;
}

}  // namespace

json read_config_document(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path.string());
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ValidationError(e.what());
  }
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (doc.is_discarded()) throw ValidationError(path.string() + ": malformed JSON");
  if (!doc.is_object()) throw ValidationError(path.string() + ": expected a JSON object");
  return doc;
}

void apply_override(json& document, std::string_view dotted_key, std::string_view value) {
  if (dotted_key.empty()) throw ValidationError("empty override key");
  json* node = &document;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : dot - start));
    if (part.empty()) {
      throw ValidationError("malformed override key \"" + std::string(dotted_key) + "\"");
    }
    if (!node->is_object()) {
      throw ValidationError("override \"" + std::string(dotted_key) +
                            "\" descends into a non-object value");
    }
    if (dot == std::string_view::npos) {
      json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
      (*node)[part] = parsed.is_discarded() ? json(std::string(value)) : parsed;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    node = &next;
    start = dot + 1;
  }
}

PipelineConfig parse_config(const json& document, const fs::path& base_dir) {
  PipelineConfig c;
  c.document = document;
  Section root(document, "");
  if (!root.has("seed")) throw ValidationError("config key \"seed\" is required");
  root.read("seed", c.seed);
  root.read("workers", c.workers);
  std::string output = "runs";
  root.read("output_dir", output);
  c.output_dir = Section::resolve(base_dir, output);

  {
    Section s = root.child("corpus");
    s.read_path("path", c.corpus_path, base_dir);
    std::string format = "jsonl";
    s.read("format", format);
    try {
      c.corpus_format = parse_corpus_format(format);
    } catch (const Error& e) {
      throw ValidationError(std::string("corpus.format: ") + e.what());
    }
    s.finish();
  }
  {
    Section s = root.child("few_shot");
    s.read_path("path", c.few_shot_path, base_dir);
    s.read("passage_char_budget", c.passage_char_budget);
    s.finish();
  }
  {
    Section s = root.child("backend");
    std::string kind = "mock";
    s.read("kind", kind);
    if (kind == "mock") {
      c.backend.kind = BackendKind::kMock;
    } else if (kind == "http") {
      c.backend.kind = BackendKind::kHttp;
    } else {
      throw ValidationError("backend.kind must be \"mock\" or \"http\", got \"" + kind + "\"");
    }
    HttpBackendOptions& h = c.backend.http;
    s.read("url", h.url);
    s.read("auth_env", h.auth_env);
    s.read("model", h.model);
    s.read("max_attempts", h.max_attempts);
    s.read("initial_backoff_ms", h.initial_backoff_ms);
    s.read("backoff_factor", h.backoff_factor);
    s.read("max_backoff_ms", h.max_backoff_ms);
    s.read("timeout_seconds", h.timeout_seconds);
    Section m = s.child("mock");
    m.read("off_topic_rate", c.backend.mock.off_topic_rate);
    m.read("degenerate_rate", c.backend.mock.degenerate_rate);
    m.finish();
    s.finish();
  }
  {
    Section s = root.child("generation");
    s.read("conversations", c.conversations);
    s.read("turns_per_conversation", c.generation.turns_per_conversation);
    s.read("p_ps", c.generation.switch_probability);
    s.read("max_regeneration_attempts", c.generation.max_regeneration_attempts);
    Section d = s.child("degeneration");
    d.read("min_tokens", c.generation.degeneration.min_tokens);
    d.read("max_tokens", c.generation.degeneration.max_tokens);
    d.read("repeat_ngram", c.generation.degeneration.repeat_ngram);
    d.read("near_duplicate_jaccard", c.generation.degeneration.near_duplicate_jaccard);
    d.finish();
    s.finish();
  }
  {
    Section s = root.child("decoding");
    s.read("top_p", c.decoding.top_p);
    s.read("temperature", c.decoding.temperature);
    s.read("max_new_tokens", c.decoding.max_new_tokens);
    s.read("stop", c.decoding.stop);
    s.finish();
  }

  c.generation.seed = c.seed;
  c.backend.mock.seed = c.seed;
  TrainConfig train_base;
  train_base.seed = c.seed;
  c.train = read_train(root.child("train"), train_base);
  {
    Section s = root.child("filter");
    s.read("top_k", c.filter.top_k);
    if (s.has("initial_train")) {
      c.filter.initial_train = read_train(s.child("initial_train"), c.train);
    }
    s.finish();
  }
  {
    Section s = root.child("retrieve");
    s.read_path("queries", c.queries_path, base_dir);
    s.read("k", c.retrieve_k);
    s.finish();
  }
  {
    Section s = root.child("evaluate");
    s.read_path("qrels", c.qrels_path, base_dir);
    s.read("metrics", c.metrics);
    s.read("rel_threshold", c.rel_threshold);
    s.finish();
  }
  root.finish();
  return c;
}

void PipelineConfig::validate() const {
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (conversations < 1) throw ValidationError("generation.conversations must be >= 1");
  if (passage_char_budget < 1) throw ValidationError("few_shot.passage_char_budget must be >= 1");
  if (retrieve_k < 1) throw ValidationError("retrieve.k must be >= 1");
  if (rel_threshold < 1) throw ValidationError("evaluate.rel_threshold must be >= 1");
  if (metrics.empty()) throw ValidationError("evaluate.metrics must not be empty");
  for (const auto& m : metrics) MetricSpec::parse(m);
  generation.validate();
  decoding.validate();
  filter.validate();
  train.validate();
  const auto& m = backend.mock;
  if (!(m.off_topic_rate >= 0.0 && m.off_topic_rate <= 1.0) ||
      !(m.degenerate_rate >= 0.0 && m.degenerate_rate <= 1.0)) {
    throw ValidationError("backend.mock rates must lie in [0, 1]");
  }
  if (backend.kind == BackendKind::kHttp) backend.http.validate();
}

std::string PipelineConfig::section_hash(
    std::initializer_list<std::string_view> sections) const {
  json subset = json::object();
  subset["seed"] = seed;
  for (auto name : sections) {
    const std::string key(name);
    subset[key] = document.contains(key) ? document.at(key) : json(nullptr);
  }
  return sha256_hex(subset.dump());
}

PipelineConfig load_config(const fs::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  json doc = read_config_document(path);
  for (const auto& [key, value] : overrides) apply_override(doc, key, value);
  PipelineConfig c = parse_config(doc, path.parent_path());
  c.validate();
  return c;
}

void require_existing(const fs::path& path, std::string_view what) {
  if (path.empty()) throw ValidationError(std::string(what) + " is not set");
  if (!fs::exists(path)) {
    throw ValidationError(std::string(what) + " not found: " + path.string());
  }
}

}  // namespace convgen
