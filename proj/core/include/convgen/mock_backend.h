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

#include "convgen/backend.h"

namespace convgen {

struct MockBackendOptions {
  std::uint64_t seed = 0;
  /// Fraction of completions built from a demonstration passage instead of
  /// the target passage (ungrounded queries for the consistency filter).
  double off_topic_rate = 0.1;
  /// Fraction of completions that come back degenerate (repetition or a
  /// leaked template line), exercising regeneration.
  double degenerate_rate = 0.05;
};

/// Deterministic stand-in for a language model.
///
/// Reads the target passage and turn number out of the prompt and writes a
/// templated question around words drawn from that passage. The output is a
/// pure function of (prompt, options.seed, sample_seed), so it is safe to
/// call from any number of threads. The raw continuation runs past the
/// query into the next "Q<n>:" cue, like a real model would, so callers
/// must rely on stop sequences.
class MockBackend final : public CompletionBackend {
 public:
  explicit MockBackend(MockBackendOptions options = {});

  std::string name() const override;

 protected:
  std::string raw_complete(std::string_view prompt, const DecodingParams& params,
                           std::uint64_t sample_seed) override;

 private:
  MockBackendOptions options_;
};

}  // namespace convgen
