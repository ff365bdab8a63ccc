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


#include "convgen/dense_index.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "convgen/error.h"
#include "convgen/hashing.h"
#include "convgen/parallel.h"

namespace convgen {
namespace {

constexpr std::string_view kIndexMagic = "CVGI";
constexpr std::uint32_t kIndexVersion = 1;

}  // namespace

void DenseIndex::save(const std::filesystem::path& path) const {
  detail::ByteWriter w;
  w.magic(kIndexMagic);
  w.put<std::uint32_t>(kIndexVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim));
  w.put<std::uint64_t>(ids.size());
  for (const auto& id : ids) w.put_string(id);
  w.put_doubles(data);
  write_file(path, w.bytes());
}

DenseIndex DenseIndex::load(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  detail::ByteReader r(bytes, path.string());
  r.expect_magic(kIndexMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kIndexVersion) {
    throw DataError(path.string() + ": unsupported index version " +
                    std::to_string(version));
  }
  DenseIndex index;
  index.dim = r.get<std::uint32_t>();
  const auto rows = r.get<std::uint64_t>();
  if (index.dim == 0) throw DataError(path.string() + ": zero embedding dimension");
  if (rows > bytes.size()) throw DataError(path.string() + ": truncated file");
  index.ids.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) index.ids.push_back(r.get_string());
  if (rows > bytes.size() / (index.dim * sizeof(double)) + 1) {
    throw DataError(path.string() + ": truncated file");
  }
  index.data.resize(rows * index.dim);
  r.get_doubles(index.data);
  if (!r.done()) throw DataError(path.string() + ": trailing bytes");
  for (double v : index.data) {
    if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite embedding");
  }
  return index;
}

DenseIndex build_index(const DualEncoderModel& model, const Corpus& corpus,
                       int workers) {
  if (corpus.empty()) throw ValidationError("cannot build an index over an empty corpus");
  DenseIndex index;
  index.dim = model.dim();
  index.ids.reserve(corpus.size());
  for (const auto& p : corpus) index.ids.push_back(p.id);
  index.data.assign(corpus.size() * index.dim, 0.0);
  parallel_for(0, corpus.size(), workers, [&](std::size_t i) {
    const Embedding e = model.encode_passage(corpus.at(i));
    std::copy(e.begin(), e.end(), index.data.begin() + static_cast<std::ptrdiff_t>(i * index.dim));
  });
  return index;
}

RankedList search(const DenseIndex& index, std::span<const double> query,
                  std::size_t k) {
  if (k < 1) throw ValidationError("search: k must be >= 1");
  if (query.size() != index.dim) {
    throw ValidationError("search: query dimension " + std::to_string(query.size()) +
                          " does not match index dimension " + std::to_string(index.dim));
  }
  const std::size_t n = index.size();
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = similarity(query, index.row(i));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min(k, n);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top),
                    order.end(), better);
  RankedList out;
  out.entries.reserve(top);
  for (std::size_t r = 0; r < top; ++r) {
    out.entries.push_back({index.ids[order[r]], scores[order[r]]});
  }
  return out;
}

}  // namespace convgen
