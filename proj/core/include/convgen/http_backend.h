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

#include <string>

#include "convgen/backend.h"

namespace convgen {

struct HttpBackendOptions {
  /// Full endpoint URL, e.g. "http://127.0.0.1:8000/v1/completions".
  std::string url;
  /// Environment variable holding the bearer token; unset or empty means
  /// no Authorization header.
  std::string auth_env = "CONVGEN_API_KEY";
  /// Optional "model" field for servers that require one.
  std::string model;
  int max_attempts = 5;
  int initial_backoff_ms = 500;
  double backoff_factor = 2.0;
  int max_backoff_ms = 16000;
  int timeout_seconds = 60;

  void validate() const;
};

struct CompletionResult {
  std::string text;  // raw continuation, before stop truncation
  int attempts = 0;  // requests issued, including the successful one
};

/// Completion client for an HTTP text-completion endpoint.
///
/// Request:  POST {"prompt", "max_tokens", "temperature", "top_p", "stop"}
/// Response: {"text": "..."}; OpenAI-style {"choices": [{"text": ...}]} is
///           accepted too.
///
/// Transport failures and 429/5xx statuses are retried with exponential
/// backoff up to max_attempts. Other statuses and undecodable bodies fail
/// immediately with a non-retriable BackendError. Each call opens its own
/// connection, so one instance can serve concurrent workers.
class HttpBackend final : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string name() const override;

  /// One request cycle including retries; exposes the attempt count.
  CompletionResult request(std::string_view prompt, const DecodingParams& params);

 protected:
  std::string raw_complete(std::string_view prompt, const DecodingParams& params,
                           std::uint64_t sample_seed) override;

 private:
  HttpBackendOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
};

}  // namespace convgen
