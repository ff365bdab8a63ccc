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

#include "convgen/model.h"

#include <cmath>

#include "binary_io.h"
#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/rng.h"

namespace convgen {
namespace {

constexpr std::string_view kModelMagic = "CVGM";
constexpr std::uint32_t kModelVersion = 1;

Embedding project(std::span<const double> weights, std::size_t dim,
                  const FeatureVector& x) {
  Embedding out(dim, 0.0);
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    const double v = x.values[k];
    const double* row = weights.data() + static_cast<std::size_t>(x.indices[k]) * dim;
    for (std::size_t j = 0; j < dim; ++j) out[j] += v * row[j];
  }
  return out;
}

}  // namespace

std::string join_history(const std::vector<std::string>& history) {
  std::string out;
  for (const auto& q : history) {
    if (!out.empty()) out += ' ';
    out += q;
  }
  return out;
}

std::string passage_encoding_text(const Passage& passage) {
  if (passage.title.empty()) return passage.text;
  return passage.title + " " + passage.text;
}

DualEncoderModel::DualEncoderModel(std::size_t dim, std::uint64_t seed)
    : dim_(dim),
      seed_(seed),
      query_(kFeatureDim * dim, 0.0),
      passage_(kFeatureDim * dim, 0.0) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

DualEncoderModel DualEncoderModel::zeros(std::size_t dim, std::uint64_t seed) {
  return DualEncoderModel(dim, seed);
}

DualEncoderModel DualEncoderModel::random(std::size_t dim, std::uint64_t seed,
                                          double scale, bool tied) {
  DualEncoderModel m(dim, seed);
  Rng rng(seed);
  for (double& w : m.query_) w = rng.uniform(-scale, scale);
  if (tied) {
    m.passage_ = m.query_;
  } else {
    for (double& w : m.passage_) w = rng.uniform(-scale, scale);
  }
  return m;
}

std::span<double> DualEncoderModel::query_row(std::size_t feature) {
  return std::span<double>(query_).subspan(feature * dim_, dim_);
}
std::span<const double> DualEncoderModel::query_row(std::size_t feature) const {
  return std::span<const double>(query_).subspan(feature * dim_, dim_);
}
std::span<double> DualEncoderModel::passage_row(std::size_t feature) {
  return std::span<double>(passage_).subspan(feature * dim_, dim_);
}
std::span<const double> DualEncoderModel::passage_row(std::size_t feature) const {
  return std::span<const double>(passage_).subspan(feature * dim_, dim_);
}

Embedding DualEncoderModel::encode_query_features(const FeatureVector& x) const {
  return project(query_, dim_, x);
}

Embedding DualEncoderModel::encode_passage_features(const FeatureVector& x) const {
  return project(passage_, dim_, x);
}

Embedding DualEncoderModel::encode_query(const std::vector<std::string>& history) const {
  return encode_query_text(join_history(history));
}

Embedding DualEncoderModel::encode_query_text(std::string_view query_context) const {
  return encode_query_features(featurize(query_context));
}

Embedding DualEncoderModel::encode_passage(const Passage& passage) const {
  return encode_passage_features(featurize(passage_encoding_text(passage)));
}

bool DualEncoderModel::finite() const {
  for (double w : query_) {
    if (!std::isfinite(w)) return false;
  }
  for (double w : passage_) {
    if (!std::isfinite(w)) return false;
  }
  return true;
}

void DualEncoderModel::save(const std::filesystem::path& path) const {
  detail::ByteWriter w;
  w.magic(kModelMagic);
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kFeatureDim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(seed_);
  w.put_doubles(query_);
  w.put_doubles(passage_);
  write_file(path, w.bytes());
}

DualEncoderModel DualEncoderModel::load(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.expect_magic(kModelMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw DataError(path.string() + ": unsupported model version " +
                    std::to_string(version));
  }
  const auto features = r.get<std::uint32_t>();
  if (features != kFeatureDim) {
    throw DataError(path.string() + ": feature dimension " +
                    std::to_string(features) + " does not match " +
                    std::to_string(kFeatureDim));
  }
  const auto dim = r.get<std::uint32_t>();
  const auto seed = r.get<std::uint64_t>();
  if (dim == 0) throw DataError(path.string() + ": zero embedding dimension");
  DualEncoderModel m(dim, seed);
  r.get_doubles(m.query_);
  r.get_doubles(m.passage_);
  if (!r.done()) throw DataError(path.string() + ": trailing bytes");
  if (!m.finite()) throw DataError(path.string() + ": non-finite weights");
  return m;
}

double similarity(std::span<const double> query, std::span<const double> passage) {
  if (query.size() != passage.size()) {
    throw ValidationError("similarity: dimension mismatch (" +
                          std::to_string(query.size()) + " vs " +
                          std::to_string(passage.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < query.size(); ++i) s += query[i] * passage[i];
  return s;
}

}  // namespace convgen
