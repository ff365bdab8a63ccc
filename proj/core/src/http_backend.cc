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

#include "convgen/http_backend.h"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "convgen/error.h"

namespace convgen {
namespace {

using nlohmann::json;

bool retriable_status(int status) { return status == 429 || status >= 500; }

std::string extract_text(const std::string& body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw BackendError("malformed backend response: not a JSON object", false, 0);
  }
  if (auto it = doc.find("text"); it != doc.end() && it->is_string()) {
    return it->get<std::string>();
  }
  if (auto it = doc.find("choices");
      it != doc.end() && it->is_array() && !it->empty()) {
    const json& first = it->front();
    if (auto t = first.find("text"); t != first.end() && t->is_string()) {
      return t->get<std::string>();
    }
  }
  throw BackendError("malformed backend response: no \"text\" field", false, 0);
}

}  // namespace

void HttpBackendOptions::validate() const {
  if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
    throw ValidationError("backend.url must start with http:// or https://, got \"" +
                          url + "\"");
  }
  if (max_attempts < 1) throw ValidationError("backend.max_attempts must be >= 1");
  if (initial_backoff_ms < 0 || max_backoff_ms < 0) {
    throw ValidationError("backend backoff delays must be nonnegative");
  }
  if (backoff_factor < 1.0) {
    throw ValidationError("backend.backoff_factor must be >= 1");
  }
  if (timeout_seconds <= 0) {
    throw ValidationError("backend.timeout_seconds must be positive");
  }
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  options_.validate();
  const std::size_t scheme_end = options_.url.find("://") + 3;
  const std::size_t slash = options_.url.find('/', scheme_end);
  if (slash == std::string::npos) {
    scheme_host_port_ = options_.url;
    path_ = "/";
  } else {
    scheme_host_port_ = options_.url.substr(0, slash);
    path_ = options_.url.substr(slash);
  }
  if (!options_.auth_env.empty()) {
    if (const char* tok = std::getenv(options_.auth_env.c_str())) token_ = tok;
  }
}

std::string HttpBackend::name() const { return "http:" + options_.url; }

CompletionResult HttpBackend::request(std::string_view prompt,
                                      const DecodingParams& params) {
  json body = {{"prompt", std::string(prompt)},
               {"max_tokens", params.max_new_tokens},
               {"temperature", params.temperature},
               {"top_p", params.top_p},
               {"stop", params.stop}};
  if (!options_.model.empty()) body["model"] = options_.model;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  double delay_ms = options_.initial_backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_write_timeout(options_.timeout_seconds, 0);

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      try {
        return {extract_text(res->body), attempt};
      } catch (const BackendError& e) {
        throw BackendError(e.what(), false, attempt);
      }
    } else if (retriable_status(res->status)) {
      last_error = "HTTP status " + std::to_string(res->status);
    } else {
      throw BackendError("backend rejected request with HTTP status " +
                             std::to_string(res->status),
                         false, attempt);
    }
    if (attempt < options_.max_attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          static_cast<long long>(std::min<double>(delay_ms, options_.max_backoff_ms))));
      delay_ms *= options_.backoff_factor;
    }
  }
  throw BackendError("backend unreachable after " +
                         std::to_string(options_.max_attempts) +
                         " attempts: " + last_error,
                     true, options_.max_attempts);
}

std::string HttpBackend::raw_complete(std::string_view prompt,
                                      const DecodingParams& params,
                                      std::uint64_t /*sample_seed*/) {
  return request(prompt, params).text;
}

}  // namespace convgen
