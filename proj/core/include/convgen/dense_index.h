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


#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "convgen/corpus.h"
#include "convgen/model.h"
#include "convgen/ranking.h"

namespace convgen {

/// Exact (brute-force) inner-product index over passage embeddings.
struct DenseIndex {
  std::vector<std::string> ids;  // row order = corpus order
  std::size_t dim = 0;
  std::vector<double> data;      // ids.size() x dim, row-major

  std::size_t size() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data).subspan(i * dim, dim);
  }

  /// Magic "CVGI", version, dim, row count, ids, then rows as float64.
  void save(const std::filesystem::path& path) const;
  static DenseIndex load(const std::filesystem::path& path);

  friend bool operator==(const DenseIndex&, const DenseIndex&) = default;
};

/// Embeds every passage with the passage tower. Throws ValidationError on
/// an empty corpus.
DenseIndex build_index(const DualEncoderModel& model, const Corpus& corpus,
                       int workers = 1);

/// Top min(k, N) rows by descending score; equal scores keep row order.
/// Throws ValidationError when k < 1 or the query length differs from dim.
RankedList search(const DenseIndex& index, std::span<const double> query,
                  std::size_t k);

}  // namespace convgen
