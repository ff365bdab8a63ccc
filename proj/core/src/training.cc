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

#include "convgen/training.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/rng.h"
#include "convgen/text.h"

namespace convgen {
namespace {

using nlohmann::json;

// Stream tag so the shuffle never shares draws with weight initialization.
constexpr std::uint64_t kShuffleStream = 0x53485546464C45ull;

SparseGradient accumulate(std::span<const FeatureVector> inputs,
                          const std::vector<Embedding>& grads, std::size_t dim) {
  std::map<std::uint32_t, std::vector<double>> rows;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const FeatureVector& x = inputs[i];
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      auto& row = rows[x.indices[k]];
      if (row.empty()) row.assign(dim, 0.0);
      const double v = x.values[k];
      for (std::size_t j = 0; j < dim; ++j) row[j] += v * grads[i][j];
    }
  }
  SparseGradient g;
  g.dim = dim;
  g.rows.reserve(rows.size());
  g.values.reserve(rows.size() * dim);
  for (auto& [idx, row] : rows) {
    g.rows.push_back(idx);
    g.values.insert(g.values.end(), row.begin(), row.end());
  }
  return g;
}

double squared_norm(const SparseGradient& g) {
  double s = 0.0;
  for (double v : g.values) s += v * v;
  return s;
}

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

// Adam moments for one tower. Only rows present in a batch gradient are
// updated ("lazy" Adam), so untouched features keep their weights.
class AdamState {
 public:
  explicit AdamState(std::size_t size) : m_(size, 0.0), v_(size, 0.0) {}

  void step(std::span<double> (DualEncoderModel::*row_of)(std::size_t), DualEncoderModel& model,
            const SparseGradient& g, double lr, double grad_scale, long t) {
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t k = 0; k < g.rows.size(); ++k) {
      auto row = (model.*row_of)(g.rows[k]);
      auto grad = g.row(k);
      const std::size_t base = static_cast<std::size_t>(g.rows[k]) * g.dim;
      for (std::size_t j = 0; j < row.size(); ++j) {
        const double gj = grad_scale * grad[j];
        double& m = m_[base + j];
        double& v = v_[base + j];
        m = kBeta1 * m + (1.0 - kBeta1) * gj;
        v = kBeta2 * v + (1.0 - kBeta2) * gj * gj;
        row[j] -= lr * (m / c1) / (std::sqrt(v / c2) + kEpsilon);
      }
    }
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) {
    throw ValidationError("train.batch_size must be >= 2 for in-batch negatives, got " +
                          std::to_string(batch_size));
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train.learning_rate must be positive");
  }
  if (epochs < 0) throw ValidationError("train.epochs must be >= 0");
  if (embedding_dim == 0) throw ValidationError("train.embedding_dim must be positive");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ValidationError("train.init_scale must be nonnegative");
  }
  if (!(max_grad_norm >= 0.0) || !std::isfinite(max_grad_norm)) {
    throw ValidationError("train.max_grad_norm must be nonnegative");
  }
}

json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},       {"learning_rate", learning_rate},
          {"epochs", epochs},               {"seed", seed},
          {"embedding_dim", embedding_dim}, {"init_scale", init_scale},
          {"tied_init", tied_init},         {"max_grad_norm", max_grad_norm}};
}

TrainConfig TrainConfig::from_json(const json& j) { return from_json(j, TrainConfig{}); }

TrainConfig TrainConfig::from_json(const json& j, const TrainConfig& base) {
  TrainConfig c = base;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.tied_init = j.value("tied_init", c.tied_init);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  return c;
}

std::vector<TrainingPair> parse_training_pairs(std::string_view contents,
                                               const std::string& source) {
  std::vector<TrainingPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(line_no) + ": ";
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw DataError(where + "malformed JSON");
    }
    auto q = obj.find("query_context");
    auto p = obj.find("positive_id");
    if (q == obj.end() || !q->is_string() || p == obj.end() || !p->is_string()) {
      throw DataError(where + "expected string fields \"query_context\" and \"positive_id\"");
    }
    TrainingPair pair{q->get<std::string>(), p->get<std::string>()};
    if (text::trim(pair.query_context).empty()) {
      throw DataError(where + "empty query_context");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path) {
  return parse_training_pairs(read_file(path), path.string());
}

std::string serialize_training_pairs(std::span<const TrainingPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += json{{"query_context", p.query_context}, {"positive_id", p.positive_id}}.dump();
    out += '\n';
  }
  return out;
}

void save_training_pairs(const std::filesystem::path& path,
                         std::span<const TrainingPair> pairs) {
  write_file(path, serialize_training_pairs(pairs));
}

double SparseGradient::at(std::uint32_t feature, std::size_t column) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), feature);
  if (it == rows.end() || *it != feature) return 0.0;
  return values[static_cast<std::size_t>(it - rows.begin()) * dim + column];
}

LossAndGradient in_batch_loss(const DualEncoderModel& model,
                              std::span<const FeatureVector> queries,
                              std::span<const FeatureVector> passages) {
  const std::size_t batch = queries.size();
  if (batch < 2) throw ValidationError("in_batch_loss needs a batch of at least 2");
  if (passages.size() != batch) {
    throw ValidationError("in_batch_loss: query and passage counts differ");
  }
  const std::size_t dim = model.dim();

  std::vector<Embedding> q(batch);
  std::vector<Embedding> p(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    q[i] = model.encode_query_features(queries[i]);
    p[i] = model.encode_passage_features(passages[i]);
  }

  const double inv_b = 1.0 / static_cast<double>(batch);
  std::vector<double> coef(batch * batch);  // (softmax - identity) / B
  double loss = 0.0;
  std::vector<double> scores(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    double max_score = -INFINITY;
    for (std::size_t j = 0; j < batch; ++j) {
      scores[j] = similarity(q[i], p[j]);
      max_score = std::max(max_score, scores[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < batch; ++j) sum += std::exp(scores[j] - max_score);
    const double lse = max_score + std::log(sum);
    loss += lse - scores[i];
    for (std::size_t j = 0; j < batch; ++j) {
      const double prob = std::exp(scores[j] - lse);
      coef[i * batch + j] = (prob - (i == j ? 1.0 : 0.0)) * inv_b;
    }
  }
  loss *= inv_b;

  std::vector<Embedding> dq(batch, Embedding(dim, 0.0));
  std::vector<Embedding> dp(batch, Embedding(dim, 0.0));
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      const double c = coef[i * batch + j];
      for (std::size_t k = 0; k < dim; ++k) {
        dq[i][k] += c * p[j][k];
        dp[j][k] += c * q[i][k];
      }
    }
  }

  LossAndGradient out;
  out.loss = loss;
  out.query = accumulate(queries, dq, dim);
  out.passage = accumulate(passages, dp, dim);
  return out;
}

LossAndGradient in_batch_loss(const DualEncoderModel& model,
                              std::span<const TrainingPair> batch,
                              const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  std::vector<FeatureVector> queries;
  std::vector<FeatureVector> passages;
  for (const auto& pair : batch) {
    if (!seen.insert(pair.positive_id).second) {
      throw ValidationError("batch contains positive \"" + pair.positive_id +
                            "\" twice; duplicates would be false negatives");
    }
    queries.push_back(featurize(pair.query_context));
    passages.push_back(featurize(passage_encoding_text(corpus.get(pair.positive_id))));
  }
  return in_batch_loss(model, queries, passages);
}

std::vector<std::vector<std::size_t>> make_batches(
    std::span<const std::string> positive_ids, std::span<const std::size_t> order,
    std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::unordered_set<std::string_view> used;
  std::vector<std::size_t> carry;

  auto flush = [&] {
    batches.push_back(std::move(current));
    current.clear();
    used.clear();
    std::vector<std::size_t> still;
    for (std::size_t idx : carry) {
      if (current.size() < batch_size && used.insert(positive_ids[idx]).second) {
        current.push_back(idx);
      } else {
        still.push_back(idx);
      }
    }
    carry = std::move(still);
  };

  for (std::size_t idx : order) {
    if (used.count(positive_ids[idx])) {
      carry.push_back(idx);
      continue;
    }
    used.insert(positive_ids[idx]);
    current.push_back(idx);
    if (current.size() == batch_size) flush();
  }
  while (!current.empty()) flush();
  return batches;
}

TrainResult train(std::span<const TrainingPair> pairs, const Corpus& corpus,
                  const TrainConfig& config) {
  config.validate();
  return train_from(DualEncoderModel::random(config.embedding_dim, config.seed,
                                             config.init_scale, config.tied_init),
                    pairs, corpus, config);
}

TrainResult train_from(DualEncoderModel model, std::span<const TrainingPair> pairs,
                       const Corpus& corpus, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw ValidationError("train: no training pairs");
  if (model.dim() != config.embedding_dim) {
    throw ValidationError("train: model dimension does not match config");
  }

  // Resolve and featurize once.
  std::vector<std::string> positive_ids;
  std::vector<FeatureVector> query_features;
  std::unordered_map<std::size_t, FeatureVector> passage_features;
  std::vector<std::size_t> positive_pos;
  positive_ids.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const auto pos = corpus.find(pair.positive_id);
    if (!pos) {
      throw DataError("training pair references unknown passage id \"" +
                      pair.positive_id + "\"");
    }
    positive_ids.push_back(pair.positive_id);
    positive_pos.push_back(*pos);
    query_features.push_back(featurize(pair.query_context));
    if (!passage_features.count(*pos)) {
      passage_features.emplace(*pos,
                               featurize(passage_encoding_text(corpus.at(*pos))));
    }
  }

  Rng rng(mix64(config.seed ^ kShuffleStream));
  std::vector<std::size_t> order(pairs.size());
  TrainResult result{std::move(model), {}, 0.0};

  AdamState query_moments(result.model.query_weights().size());
  AdamState passage_moments(result.model.passage_weights().size());
  long step = 0;
  std::vector<FeatureVector> qs;
  std::vector<FeatureVector> ps;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const auto batches = make_batches(positive_ids, order,
                                      static_cast<std::size_t>(config.batch_size));
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      if (batch.size() < 2) {
        ++stats.skipped;
        continue;
      }
      qs.clear();
      ps.clear();
      for (std::size_t idx : batch) {
        qs.push_back(query_features[idx]);
        ps.push_back(passage_features.at(positive_pos[idx]));
      }
      const LossAndGradient lg = in_batch_loss(result.model, qs, ps);
      double scale = 1.0;
      if (config.max_grad_norm > 0.0) {
        const double norm = std::sqrt(squared_norm(lg.query) + squared_norm(lg.passage));
        if (norm > config.max_grad_norm) scale = config.max_grad_norm / norm;
      }
      ++step;
      query_moments.step(&DualEncoderModel::query_row, result.model, lg.query,
                         config.learning_rate, scale, step);
      passage_moments.step(&DualEncoderModel::passage_row, result.model, lg.passage,
                           config.learning_rate, scale, step);
      loss_sum += lg.loss;
      ++stats.batches;
    }
    stats.mean_loss = stats.batches ? loss_sum / static_cast<double>(stats.batches) : 0.0;
    result.epochs.push_back(stats);
  }
  if (!result.epochs.empty()) result.final_loss = result.epochs.back().mean_loss;
  if (!result.model.finite()) {
    throw DataError("training diverged: non-finite weights (lower train.learning_rate)");
  }
  return result;
}

}  // namespace convgen
