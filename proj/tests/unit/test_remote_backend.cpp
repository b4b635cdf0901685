// test_remote_backend.cpp
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
//
// Contract tests against an in-process fake model service.

#include <gtest/gtest.h>

#include <thread>

#include "fake_service.hpp"
#include "httplib.h"
#include "json.hpp"
#include "test_support.hpp"
#include "wozsynth/collector.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/remote_backend.hpp"
#include "wozsynth/synthesizer.hpp"

namespace wozsynth {
namespace {

using nlohmann::json;

class RemoteTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { service_ = new testing::FakeModelService(); }
  static void TearDownTestSuite() {
    delete service_;
    service_ = nullptr;
  }
  static Endpoint endpoint() {
    Endpoint ep = Endpoint::parse(service_->url());
    ep.timeout_seconds = 5;
    return ep;
  }
  static testing::FakeModelService* service_;
};

testing::FakeModelService* RemoteTest::service_ = nullptr;

TEST(Endpoint, Parsing) {
  Endpoint a = Endpoint::parse("http://127.0.0.1:8000");
  EXPECT_EQ(a.scheme_host_port, "http://127.0.0.1:8000");
  EXPECT_EQ(a.path_prefix, "");
  Endpoint b = Endpoint::parse("https://models.local/v1/");
  EXPECT_EQ(b.scheme_host_port, "https://models.local");
  EXPECT_EQ(b.path_prefix, "/v1");
  EXPECT_THROW(Endpoint::parse("ftp://x"), ConfigError);
  EXPECT_THROW(Endpoint::parse("localhost:80"), ConfigError);
  EXPECT_THROW(Endpoint::parse("http://"), ConfigError);
}

TEST(WireFormat, RequestBodies) {
  GoalInstruction g;
  g.text = "hi";
  json gen = json::parse(generate_request_json(serialize_input(g, {}), {0.92, 0.7, 256, 9}));
  EXPECT_EQ(gen["input_text"], "<s> hi </s>");
  EXPECT_DOUBLE_EQ(gen["top_p"].get<double>(), 0.92);
  EXPECT_DOUBLE_EQ(gen["temperature"].get<double>(), 0.7);
  EXPECT_EQ(gen["max_tokens"], 256);
  EXPECT_EQ(gen["seed"], 9);
  json sc = json::parse(score_request_json("ctx", "q?", {"a", "b", "c"}));
  EXPECT_EQ(sc["options"].size(), 3u);
}

TEST(WireFormat, ResponseParsing) {
  auto r = parse_generate_response(200, R"({"text": "<system> a <user> b", "token_logprobs": [-1, -2]})");
  EXPECT_EQ(r.text, "<system> a <user> b");
  ASSERT_TRUE(r.token_logprobs);
  EXPECT_EQ(r.token_logprobs->size(), 2u);
  EXPECT_FALSE(parse_generate_response(200, R"({"text": "x"})").token_logprobs);
  EXPECT_THROW(parse_generate_response(200, "not json"), ProtocolError);
  EXPECT_THROW(parse_generate_response(200, R"({"txt": "x"})"), ProtocolError);
  EXPECT_THROW(parse_generate_response(400, R"({"code": "bad_request", "message": "m"})"),
               ProtocolError);
  try {
    parse_generate_response(503, R"({"code": "overloaded", "message": "busy"})");
    FAIL();
  } catch (const ProtocolError&) {
    FAIL() << "5xx must be retryable";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("overloaded"), std::string::npos);
  }
  EXPECT_EQ(parse_score_response(200, R"({"logits": [1, 2.5]})"), (std::vector<double>{1, 2.5}));
  EXPECT_THROW(parse_score_response(200, R"({"logits": ["a"]})"), ProtocolError);
}

TEST_F(RemoteTest, ScoreThreeOptions) {
  RemoteLabeler l(endpoint());
  auto logits = l.score("<system> <user> hi", "q?", {"north", "east", "None"});
  EXPECT_EQ(logits.size(), 3u);
  MultipleChoiceQuery q{"<system> <user> hi", "q?", {"a", "bbb", "cc"}, ""};
  EXPECT_EQ(score(l, q).chosen_index, 1u);
}

TEST_F(RemoteTest, GenerateEcho) {
  RemoteCollector c(endpoint());
  GoalInstruction g;
  g.text = "book a table & more";
  CollectorInput in = serialize_input(g, {});
  auto res = c.generate(in, {0.9, 1.0, 64, 1});
  ASSERT_TRUE(res.token_logprobs);
  Dialogue d = parse_generated(res.text);
  ASSERT_EQ(d.turns.size(), 1u);
  EXPECT_EQ(d.turns[0].user, in.text);
}

TEST_F(RemoteTest, ErrorMapping) {
  RemoteLabeler l(endpoint());
  try {
    l.score("ctx", "fail-500", {"a"});
    FAIL();
  } catch (const ProtocolError&) {
    FAIL() << "500 must be retryable";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
  }
  try {
    l.score("ctx", "fail-429", {"a"});
    FAIL();
  } catch (const ProtocolError&) {
    FAIL() << "429 must be retryable";
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
  }
  EXPECT_THROW(l.score("ctx", "fail-404", {"a"}), ProtocolError);
  EXPECT_THROW(l.score("ctx", "garbage", {"a"}), ProtocolError);
  MultipleChoiceQuery q{"ctx", "short", {"a", "b"}, ""};
  EXPECT_THROW(score(l, q), ProtocolError);
}

TEST_F(RemoteTest, MalformedRequestGets400) {
  httplib::Client cli(service_->url());
  auto res = cli.Post("/score", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  json body = json::parse(res->body);
  EXPECT_TRUE(body.contains("code"));
  EXPECT_TRUE(body.contains("message"));
  auto res2 = cli.Post("/generate", R"({"top_p": 0.9})", "application/json");
  ASSERT_TRUE(res2);
  EXPECT_EQ(res2->status, 400);
}

TEST(RemoteTransport, RefusedConnectionIsRetryable) {
  Endpoint ep = Endpoint::parse("http://127.0.0.1:1");
  ep.timeout_seconds = 2;
  RemoteLabeler l(ep);
  try {
    l.score("ctx", "q", {"a"});
    FAIL();
  } catch (const ProtocolError&) {
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_TRUE(e.retryable());
  }
}

TEST_F(RemoteTest, SynthesisOverHttp) {
  SynthesisJob job = testing::random_job(3, 4);
  job.jobs = 2;
  RemoteCollector c(endpoint());
  RemoteLabeler l(endpoint());
  SynthesisResult r = synthesize(job, c, l);
  EXPECT_EQ(r.corpus.size(), 4u);
  EXPECT_EQ(r.shortfall, 0u);
}

}  // namespace
}  // namespace wozsynth
