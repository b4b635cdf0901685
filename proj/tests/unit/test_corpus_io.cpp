// test_corpus_io.cpp
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

#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "test_support.hpp"
#include "wozsynth/corpus_io.hpp"
#include "wozsynth/dst_eval.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/multiwoz.hpp"

namespace wozsynth {
namespace {

using nlohmann::json;

TEST(CorpusIo, NativeRoundTrip) {
  const Schema& s = default_multiwoz_schema();
  Corpus c = ingest_multiwoz(testing::fixture_dir(), s).corpus;
  const std::string text = corpus_to_json(c);
  Corpus back = parse_corpus_json(text, &s);
  EXPECT_EQ(corpus_to_json(back), text);
  ASSERT_EQ(back.size(), c.size());
  EXPECT_EQ(back[1].annotations, c[1].annotations);
  EXPECT_EQ(back[1].goal, c[1].goal);
}

TEST(CorpusIo, RejectsBadDocuments) {
  const Schema& s = default_multiwoz_schema();
  EXPECT_THROW(parse_corpus_json("[]"), ParseError);
  EXPECT_THROW(parse_corpus_json(R"({"format": "wozsynth-corpus", "version": 99, "dialogues": []})"),
               ParseError);
  const char* unknown_slot = R"({"format": "wozsynth-corpus", "version": 1, "dialogues": [
      {"id": "a", "domains": [], "turns": [{"system": "", "user": "hi",
        "state": {"hotel-colour": "red"}, "active_domain": "Hotel"}]}]})";
  EXPECT_NO_THROW(parse_corpus_json(unknown_slot));
  EXPECT_THROW(parse_corpus_json(unknown_slot, &s), ValidationError);
}

TEST(CorpusIo, TurnJsonlCountsFromOne) {
  const Schema& s = default_multiwoz_schema();
  Corpus c = ingest_multiwoz(testing::fixture_dir(), s).corpus;
  const std::string jsonl = corpus_to_turn_jsonl(c);
  std::istringstream in(jsonl);
  std::string line;
  std::getline(in, line);
  json first = json::parse(line);
  EXPECT_EQ(first["turn_idx"], 1);
  EXPECT_TRUE(first.contains("belief_state"));
  // The predictions reader accepts the same lines, so gold scores itself perfectly.
  PredictionSet p = parse_predictions_jsonl(jsonl);
  EXPECT_DOUBLE_EQ(joint_goal_accuracy(p, prediction_set_from_corpus(c)), 1.0);
}

TEST(CorpusIo, TradeLayout) {
  const Schema& s = default_multiwoz_schema();
  Corpus c = ingest_multiwoz(testing::fixture_dir(), s).corpus;
  json t = json::parse(corpus_to_trade_json(c));
  ASSERT_TRUE(t.is_array());
  ASSERT_EQ(t.size(), 3u);
  bool found_dontcare = false;
  for (const auto& d : t) {
    ASSERT_TRUE(d.contains("dialogue_idx"));
    const auto& turns = d["dialogue"];
    EXPECT_EQ(turns[0]["turn_idx"], 0);
    EXPECT_EQ(turns[0]["system_transcript"], "");
    for (const auto& turn : turns)
      for (const auto& b : turn["belief_state"]) {
        EXPECT_EQ(b["act"], "inform");
        if (b["slots"][0][1] == "dontcare") found_dontcare = true;
        EXPECT_NE(b["slots"][0][1], "Dontcare");
      }
  }
  EXPECT_TRUE(found_dontcare);
}

}  // namespace
}  // namespace wozsynth
