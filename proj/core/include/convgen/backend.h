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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace convgen {

/// Nucleus-sampling decoding parameters sent with every completion request.
struct DecodingParams {
  double top_p = 0.95;
  double temperature = 0.75;
  int max_new_tokens = 64;
  std::vector<std::string> stop = {"\n"};

  /// Throws ValidationError unless 0 < top_p <= 1, temperature > 0 and
  /// max_new_tokens > 0.
  void validate() const;
};

/// Cuts `raw` at the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string_view raw,
                             const std::vector<std::string>& stop);

/// A text-completion model. Implementations must tolerate concurrent calls.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Continuation of `prompt` (prompt excluded), cut at the first stop
  /// sequence. `sample_seed` selects the sample for backends that can be
  /// seeded; a regeneration passes a fresh seed.
  ///
  /// Throws ValidationError on an empty prompt and BackendError on failure.
  std::string complete(std::string_view prompt, const DecodingParams& params,
                       std::uint64_t sample_seed = 0);

  /// Identifier recorded in conversation provenance.
  virtual std::string name() const = 0;

 protected:
  virtual std::string raw_complete(std::string_view prompt,
                                   const DecodingParams& params,
                                   std::uint64_t sample_seed) = 0;
};

}  // namespace convgen
