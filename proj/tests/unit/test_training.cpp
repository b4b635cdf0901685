// test_training.cpp
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
#include "wozsynth/errors.hpp"
#include "wozsynth/multiwoz.hpp"
#include "wozsynth/oracle_labeler.hpp"
#include "wozsynth/surrogate.hpp"
#include "wozsynth/text.hpp"
#include "wozsynth/training.hpp"

namespace wozsynth {
namespace {

using nlohmann::json;

std::vector<json> lines(const std::string& jsonl) {
  std::vector<json> out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

Corpus ingested() { return ingest_multiwoz(testing::fixture_dir(), default_multiwoz_schema()).corpus; }

TEST(CollectorTraining, OneExamplePerDialogue) {
  Corpus c = ingested();
  CollectorTraining t = emit_collector_training(c);
  auto ls = lines(t.jsonl);
  ASSERT_EQ(ls.size(), c.size() + 1);
  EXPECT_EQ(ls[0]["format"], "wozsynth-collector-train");
  EXPECT_DOUBLE_EQ(ls[0]["label_smoothing"].get<double>(), 0.1);
  std::size_t tokens = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const std::string target = ls[i]["target"];
    EXPECT_EQ(target.rfind("<system>", 0), 0u);
    EXPECT_EQ(ls[i]["source"].get<std::string>().rfind("<s> ", 0), 0u);
    tokens += count_tokens(target);
  }
  EXPECT_EQ(t.manifest.dialogues, c.size());
  EXPECT_EQ(t.manifest.target_tokens, tokens);
}

TEST(CollectorTraining, EmptyCorpusHasHeader) {
  CollectorTraining t = emit_collector_training({});
  auto ls = lines(t.jsonl);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_EQ(ls[0]["version"], 1);
  EXPECT_EQ(t.manifest.dialogues, 0u);
}

TEST(CollectorTraining, NoGoalRejected) {
  AnnotatedDialogue d;
  d.id = "x";
  d.dialogue.turns = {{"", "hi"}};
  EXPECT_THROW(collector_training_example(d), ValidationError);
}

TEST(LabelerTraining, WeightsAndCounts) {
  const Schema& s = default_multiwoz_schema();
  Corpus c = ingested();
  LabelerTraining t = emit_labeler_training(c, s, LabelerConfig::for_schema(s));
  auto ls = lines(t.jsonl);
  ASSERT_GE(ls.size(), 2u);
  EXPECT_DOUBLE_EQ(ls[0]["beta"].get<double>(), 5.0);
  std::size_t none = 0, non_none = 0, turns = 0;
  for (const auto& d : c) turns += d.dialogue.turns.size();
  bool saw_north = false;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto& r = ls[i];
    const auto& opts = r["options"];
    const std::string answer = opts[r["answer_index"].get<std::size_t>()];
    const double w = r["weight"];
    if (answer == "None") {
      ++none;
      EXPECT_EQ(w, 1.0);
    } else {
      ++non_none;
      EXPECT_EQ(w, 5.0);
    }
    if (r["slot"] == "hotel-area" && answer == "north") saw_north = true;
  }
  EXPECT_TRUE(saw_north);
  EXPECT_EQ(t.manifest.records, ls.size() - 1);
  EXPECT_EQ(t.manifest.none_answers, none);
  EXPECT_EQ(t.manifest.non_none_answers, non_none);
  EXPECT_EQ(t.manifest.turns, turns);
  EXPECT_EQ(t.manifest.records + t.manifest.skipped_domain_questions, turns * 31);
  EXPECT_NE(manifest_json(t.manifest).find("\"beta\""), std::string::npos);
}

TEST(LabelerTraining, CustomBeta) {
  const Schema& s = default_multiwoz_schema();
  Corpus c = ingested();
  LabelerTraining ok = emit_labeler_training(c, s, LabelerConfig::for_schema(s), 2.0);
  EXPECT_EQ(ok.manifest.beta, 2.0);
  for (const auto& l : lines(ok.jsonl))
    if (l.contains("weight")) {
      EXPECT_TRUE(l["weight"] == 1.0 || l["weight"] == 2.0);
    }
}

}  // namespace
}  // namespace wozsynth
