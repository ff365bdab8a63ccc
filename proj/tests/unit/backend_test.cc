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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

#include "convgen/error.h"
#include "convgen/http_backend.h"
#include "convgen/mock_backend.h"
#include "convgen/prompt.h"
#include "fake_server.h"
#include "test_support.h"

namespace convgen {
namespace {

using testing::FakeCompletionServer;
using testing::ScriptedResponse;

HttpBackendOptions fast_options(const std::string& url) {
  HttpBackendOptions o;
  o.url = url;
  o.auth_env = "CONVGEN_TEST_TOKEN";
  o.initial_backoff_ms = 1;
  o.max_backoff_ms = 4;
  o.timeout_seconds = 5;
  return o;
}

TEST(DecodingParamsTest, Validation) {
  DecodingParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.top_p, 0.95);
  EXPECT_DOUBLE_EQ(p.temperature, 0.75);
  p.top_p = 1.0;
  EXPECT_NO_THROW(p.validate());
  p.top_p = 1.01;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.top_p = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.temperature = 0.0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.max_new_tokens = 0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(StopSequenceTest, CutsAtFirstStop) {
  EXPECT_EQ(truncate_at_stop("when was it built?\nQ3:", {"\n"}), "when was it built?");
  EXPECT_EQ(truncate_at_stop("abc", {"\n"}), "abc");
  EXPECT_EQ(truncate_at_stop("a?b!c", {"!", "?"}), "a");
  EXPECT_EQ(truncate_at_stop("a?b!c", {}), "a?b!c");
}

TEST(MockBackendTest, SamePromptSameCompletion) {
  MockBackend mock({.seed = 3});
  const Corpus corpus = testing::fixture_corpus();
  const Template t1 = build_first_turn_template(testing::fixture_few_shot());
  const std::string prompt = render_prompt(t1, corpus.get("petra-2"), {});
  DecodingParams params;
  const std::string a = mock.complete(prompt, params, 9);
  EXPECT_EQ(a, mock.complete(prompt, params, 9));
  EXPECT_EQ(a, MockBackend({.seed = 3}).complete(prompt, params, 9));
  EXPECT_EQ(a.find('\n'), std::string::npos);
  EXPECT_FALSE(a.empty());
}

TEST(MockBackendTest, RawOutputNeedsTheStopSequence) {
  MockBackend mock({.seed = 3, .off_topic_rate = 0.0, .degenerate_rate = 0.0});
  const Corpus corpus = testing::fixture_corpus();
  const Template t1 = build_first_turn_template(testing::fixture_few_shot());
  const std::string prompt = render_prompt(t1, corpus.get("petra-2"), {});
  DecodingParams no_stop;
  no_stop.stop = {"\nQ9:"};
  DecodingParams params;
  const std::string cut = mock.complete(prompt, params, 1);
  const std::string raw = mock.complete(prompt, no_stop, 1);
  EXPECT_NE(raw, cut);
  EXPECT_TRUE(raw.starts_with(cut + "\n"));
}

TEST(MockBackendTest, EmptyPromptIsRejected) {
  MockBackend mock;
  EXPECT_THROW(mock.complete("", DecodingParams{}), ValidationError);
}

TEST(HttpBackendTest, RetriesRateLimitThenSucceeds) {
  FakeCompletionServer server({{429, "{}"}, {429, "{}"}, {200, R"({"text": " when?\nQ2:"})"}});
  HttpBackend backend(fast_options(server.url()));
  const CompletionResult r = backend.request("Title: x\nQ1:", DecodingParams{});
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(r.text, " when?\nQ2:");
  EXPECT_EQ(server.requests().size(), 3u);
}

TEST(HttpBackendTest, CompleteAppliesStopSequence) {
  FakeCompletionServer server({{200, R"({"text": "when was it built?\nQ3:"})"}});
  HttpBackend backend(fast_options(server.url()));
  EXPECT_EQ(backend.complete("prompt", DecodingParams{}), "when was it built?");
}

TEST(HttpBackendTest, RequestBodyCarriesDecodingParams) {
  FakeCompletionServer server({{200, R"({"text": "ok"})"}});
  auto options = fast_options(server.url());
  options.model = "local-model";
  HttpBackend backend(options);
  DecodingParams params;
  params.max_new_tokens = 32;
  backend.complete("the prompt", params);
  const auto reqs = server.requests();
  ASSERT_EQ(reqs.size(), 1u);
  const auto body = nlohmann::json::parse(reqs[0].body);
  EXPECT_EQ(body["prompt"], "the prompt");
  EXPECT_EQ(body["max_tokens"], 32);
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(body["top_p"].get<double>(), 0.95);
  EXPECT_EQ(body["stop"], nlohmann::json::array({"\n"}));
  EXPECT_EQ(body["model"], "local-model");
}

TEST(HttpBackendTest, ServerErrorsExhaustAttempts) {
  FakeCompletionServer server({{503, "busy"}});
  HttpBackend backend(fast_options(server.url()));
  try {
    backend.complete("prompt", DecodingParams{});
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retriable());
    EXPECT_EQ(e.attempts(), 5);
  }
  EXPECT_EQ(server.requests().size(), 5u);
}

TEST(HttpBackendTest, ClientErrorIsNotRetried) {
  FakeCompletionServer server({{400, "bad"}});
  HttpBackend backend(fast_options(server.url()));
  try {
    backend.complete("prompt", DecodingParams{});
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_FALSE(e.retriable());
    EXPECT_EQ(e.attempts(), 1);
  }
}

TEST(HttpBackendTest, MalformedBodyIsNotRetried) {
  for (const char* body : {"not json", R"({"other": 1})", "[1, 2]"}) {
    FakeCompletionServer server({{200, body}});
    HttpBackend backend(fast_options(server.url()));
    try {
      backend.complete("prompt", DecodingParams{});
      FAIL() << "expected BackendError for " << body;
    } catch (const BackendError& e) {
      EXPECT_FALSE(e.retriable());
      EXPECT_EQ(server.requests().size(), 1u);
    }
  }
}

TEST(HttpBackendTest, AcceptsChoicesShape) {
  FakeCompletionServer server({{200, R"({"choices": [{"text": "from choices"}]})"}});
  HttpBackend backend(fast_options(server.url()));
  EXPECT_EQ(backend.complete("prompt", DecodingParams{}), "from choices");
}

TEST(HttpBackendTest, SendsBearerTokenFromEnvironment) {
  FakeCompletionServer server({{200, R"({"text": "ok"})"}});
  ::setenv("CONVGEN_TEST_TOKEN", "s3cret", 1);
  HttpBackend with_token(fast_options(server.url()));
  ::unsetenv("CONVGEN_TEST_TOKEN");
  HttpBackend without_token(fast_options(server.url()));
  with_token.complete("prompt", DecodingParams{});
  without_token.complete("prompt", DecodingParams{});
  const auto reqs = server.requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].authorization, "Bearer s3cret");
  EXPECT_EQ(reqs[1].authorization, "");
}

TEST(HttpBackendTest, UnreachableServerIsRetriable) {
  int port = 0;
  {
    FakeCompletionServer server({{200, "{}"}});
    port = std::stoi(server.url().substr(17));
  }
  auto options = fast_options("http://127.0.0.1:" + std::to_string(port) + "/v1/completions");
  options.max_attempts = 2;
  options.timeout_seconds = 1;
  HttpBackend backend(options);
  try {
    backend.complete("prompt", DecodingParams{});
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retriable());
    EXPECT_EQ(e.attempts(), 2);
  }
}

TEST(HttpBackendTest, OptionValidation) {
  EXPECT_THROW(HttpBackend(fast_options("ftp://x")), ValidationError);
  auto o = fast_options("http://127.0.0.1:1/x");
  o.max_attempts = 0;
  EXPECT_THROW(HttpBackend{o}, ValidationError);
}

}  // namespace
}  // namespace convgen
