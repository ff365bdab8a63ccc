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

// Small string helpers shared by the corpus, prompt, generator and
// featurizer code. Everything here is byte-oriented: only ASCII letters are
// case-folded and any byte >= 0x80 is treated as part of a word, so UTF-8
// sequences pass through untouched.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace convgen::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

/// Lowercases and splits on every byte that is not an ASCII letter/digit
/// (bytes >= 0x80 count as word bytes).
std::vector<std::string> word_tokens(std::string_view s);

/// Replaces CR/LF/tab with spaces and collapses whitespace runs.
std::string single_line(std::string_view s);

/// Truncates to at most `budget` bytes, cutting at the last whitespace
/// boundary inside the budget when one exists and never splitting a UTF-8
/// sequence.
std::string truncate_at_whitespace(std::string_view s, std::size_t budget);

/// |a ∩ b| / |a ∪ b| over token sets; 0 when both are empty.
double jaccard(const std::vector<std::string>& a,
               const std::vector<std::string>& b);

/// True when every byte sequence is well-formed UTF-8.
bool is_valid_utf8(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

/// FNV-1a over the bytes of `s`.
std::uint32_t fnv1a32(std::string_view s);
std::uint64_t fnv1a64(std::string_view s);

/// Lowercase hex rendering of a 64-bit value, zero padded to 16 digits.
std::string hex64(std::uint64_t v);

}  // namespace convgen::text
