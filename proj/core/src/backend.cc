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

#include "convgen/backend.h"

#include <cmath>

#include "convgen/error.h"

namespace convgen {

void DecodingParams::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw ValidationError("decoding.top_p must be in (0, 1]");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("decoding.temperature must be positive");
  }
  if (max_new_tokens <= 0) {
    throw ValidationError("decoding.max_new_tokens must be positive");
  }
  for (const auto& s : stop) {
    if (s.empty()) throw ValidationError("decoding.stop entries must be nonempty");
  }
}

std::string truncate_at_stop(std::string_view raw,
                             const std::vector<std::string>& stop) {
  std::size_t cut = raw.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    const std::size_t at = raw.find(s);
    if (at < cut) cut = at;
  }
  return std::string(raw.substr(0, cut));
}

std::string CompletionBackend::complete(std::string_view prompt,
                                        const DecodingParams& params,
                                        std::uint64_t sample_seed) {
  if (prompt.empty()) throw ValidationError("completion prompt is empty");
  return truncate_at_stop(raw_complete(prompt, params, sample_seed), params.stop);
}

}  // namespace convgen
