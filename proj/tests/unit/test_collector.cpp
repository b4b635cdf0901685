// test_collector.cpp
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

#include <atomic>
#include <set>

#include "test_support.hpp"
#include "wozsynth/collector.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/surrogate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {
namespace {

GoalInstruction graffiti_goal() {
  GoalInstruction g;
  g.text = "you are looking for a restaurant in the expensive price range serving british food";
  g.explicit_pairs = {{"restaurant-pricerange", "expensive"}, {"restaurant-food", "british"},
                      {"restaurant-book people", "4"}};
  g.domains = {"restaurant"};
  g.template_id = "fig1";
  return g;
}

APICallResultSet graffiti_api() {
  APICallResultSet a;
  a.results.push_back({"restaurant",
                       {{"restaurant-food", "british"},
                        {"restaurant-pricerange", "expensive"},
                        {"restaurant-area", "west"},
                        {"restaurant-name", "graffiti"},
                        {"restaurant-phone", "01223277977"}}});
  a.serves.push_back("restaurant");
  return a;
}

// ---- candidates ----

TEST(Candidates, FromGoalAndApi) {
  const Schema& s = default_multiwoz_schema();
  PairSet g = candidates_from_goal(graffiti_goal(), s);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_TRUE(g.contains({"restaurant-book people", "4"}));
  PairSet a = candidates_from_api(graffiti_api(), s);
  EXPECT_TRUE(a.contains({"restaurant-name", "graffiti"}));
  // Requestable slots never become candidates.
  EXPECT_FALSE(a.contains({"restaurant-phone", "01223277977"}));
  EXPECT_TRUE(candidates_from_api({}, s).empty());
  EXPECT_TRUE(candidates_from_goal(GoalInstruction{}, s).empty());
}

TEST(Candidates, SixPlantedPairs) {
  const Schema& s = default_multiwoz_schema();
  GoalInstruction g;
  g.explicit_pairs = {{"hotel-area", "north"},       {"hotel-stars", "4"},
                      {"hotel-book day", "monday"},  {"taxi-leaveat", "10:00"},
                      {"train-day", "friday"},       {"attraction-type", "museum"},
                      {"hotel-address", "1 road"}};
  PairSet want = {{"hotel-area", "north"},      {"hotel-stars", "4"},
                  {"hotel-book day", "monday"}, {"taxi-leaveat", "10:00"},
                  {"train-day", "friday"},      {"attraction-type", "museum"}};
  EXPECT_EQ(candidates_from_goal(g, s), want);
}

TEST(Candidates, ApiMatchesNestedLoop) {
  const Schema& s = default_multiwoz_schema();
  Rng rng(4);
  KnowledgeBase kb = testing::random_kb(s, rng, 10);
  for (int round = 0; round < 20; ++round) {
    APICallResultSet a;
    for (const std::string d : {"restaurant", "hotel", "attraction"}) {
      const auto& inst = kb.instances(d);
      a.results.push_back(inst[rng.uniform_index(inst.size())]);
      a.serves.push_back(d);
    }
    std::set<SlotValue> want;
    for (const auto& r : a.results)
      for (const auto& p : r.pairs)
        if (s.find_slot(p.first)->informable()) want.insert(p);
    PairSet got = candidates_from_api(a, s);
    EXPECT_EQ(std::set<SlotValue>(got.begin(), got.end()), want);
  }
}

TEST(OptionSet, Construction) {
  const Schema& s = default_multiwoz_schema();
  StateCandidateSet c;
  c.from_goal = {{"restaurant-food", "british"}};
  c.from_api = {{"restaurant-food", "british"}, {"restaurant-area", "west"}};
  auto o = build_option_set(c, *s.find_slot("restaurant-food"));
  EXPECT_EQ(o.options, (std::vector<std::string>{"british", "Dontcare", "None"}));
  auto e = build_option_set(c, *s.find_slot("hotel-area"));
  EXPECT_EQ(e.options, (std::vector<std::string>{"Dontcare", "None"}));
  EXPECT_THROW(build_option_set(c, *s.find_slot("restaurant-phone")), ValidationError);
  EXPECT_TRUE(is_none("None"));
  EXPECT_TRUE(is_dontcare(" dontcare"));
  EXPECT_FALSE(is_sentinel("north"));
}

TEST(OptionSet, CandidatesFromStates) {
  std::vector<TurnAnnotation> states = {{{{"hotel-area", "north"}}, "Hotel"},
                                        {{{"hotel-area", "north"}, {"hotel-stars", "4"}}, "Hotel"},
                                        {{{"hotel-area", "Dontcare"}}, "Hotel"}};
  auto c = candidates_from_states(states);
  // Sentinels are not candidates; they are appended to every option set.
  EXPECT_EQ(c.all().size(), 2u);
}

// ---- serialization ----

TEST(CollectorInput, GraffitiLayout) {
  const Schema& s = default_multiwoz_schema();
  CollectorInput in = serialize_input(graffiti_goal(), graffiti_api());
  EXPECT_EQ(in.text.rfind("<s> you are looking", 0), 0u);
  EXPECT_NE(in.text.find("</s> <domain> restaurant <slot> restaurant-food british"),
            std::string::npos);
  EXPECT_NE(in.text.find("<slot> restaurant-name graffiti"), std::string::npos);
  auto parsed = parse_input(in.text, s);
  EXPECT_EQ(parsed.goal_text, graffiti_goal().text);
  ASSERT_EQ(parsed.results.size(), 1u);
  EXPECT_EQ(parsed.results[0].domain, "restaurant");
  EXPECT_EQ(parsed.results[0].pairs, graffiti_api().results[0].pairs);
}

TEST(CollectorInput, EmptyResults) {
  GoalInstruction g;
  g.text = "hello there";
  EXPECT_EQ(serialize_input(g, {}).text, "<s> hello there </s>");
}

TEST(CollectorInput, EscapingRoundTrip) {
  const Schema& s = default_multiwoz_schema();
  GoalInstruction g;
  g.text = "find <b>fish & chips</b> <domain> please";
  APICallResultSet a;
  a.results.push_back({"restaurant", {{"restaurant-name", "a<b & c"}, {"restaurant-food", "x"}}});
  a.serves.push_back("restaurant");
  CollectorInput in = serialize_input(g, a);
  EXPECT_EQ(in.text.find("<b>"), std::string::npos);
  auto back = parse_input(in.text, s);
  EXPECT_EQ(back.goal_text, g.text);
  EXPECT_EQ(back.results[0].pairs, a.results[0].pairs);
  EXPECT_EQ(unescape_text(escape_text("&amp; <x>")), "&amp; <x>");
}

TEST(CollectorInput, RandomRoundTrip) {
  const Schema& s = default_multiwoz_schema();
  Rng rng(21);
  KnowledgeBase kb = testing::random_kb(s, rng, 10);
  for (int i = 0; i < 200; ++i) {
    GoalTemplate t = testing::random_template(rng, "t");
    APICallResultSet a;
    try {
      a = sample_api_results(t, kb, rng);
    } catch (const UnsatisfiableError&) {
      continue;
    }
    GoalInstruction g = instantiate(t, a, s, rng);
    auto back = parse_input(serialize_input(g, a).text, s);
    ASSERT_EQ(back.goal_text, g.text);
    ASSERT_EQ(back.results.size(), a.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(back.results[k].pairs, a.results[k].pairs);
  }
}

TEST(CollectorInput, TooManyResults) {
  APICallResultSet a;
  for (int i = 0; i < 4; ++i) {
    a.results.push_back({"hotel", {{"hotel-name", "h" + std::to_string(i)}}});
    a.serves.push_back("hotel");
  }
  EXPECT_THROW(serialize_input(GoalInstruction{}, a), ValidationError);
}

// ---- generated dialogue parsing ----

TEST(ParseGenerated, Grammar) {
  Dialogue d = parse_generated("<system> hi <user> a table please <system> done <user> bye");
  ASSERT_EQ(d.turns.size(), 2u);
  EXPECT_EQ(d.turns[1].system, "done");
  EXPECT_EQ(d.turns[1].user, "bye");
  EXPECT_EQ(render_dialogue(d.turns), "<system> hi <user> a table please <system> done <user> bye");
  EXPECT_THROW(parse_generated("<user> hi <user> hi"), MalformedGenerationError);
  EXPECT_THROW(parse_generated("<system> hi <system> hi <user> x"), MalformedGenerationError);
  EXPECT_THROW(parse_generated("<system> <user> x"), MalformedGenerationError);
  EXPECT_THROW(parse_generated(""), MalformedGenerationError);
  ParseReport r;
  Dialogue t = parse_generated("<system> hi <user> x <system> dangling", &r);
  EXPECT_EQ(t.turns.size(), 1u);
  EXPECT_TRUE(r.truncated_trailing_system);
}

TEST(GenerationParams, Validation) {
  EXPECT_NO_THROW((GenerationParams{0.92, 0.7, 512, 1}.validate()));
  EXPECT_THROW((GenerationParams{0.0, 0.7, 512, 1}.validate()), ConfigError);
  EXPECT_THROW((GenerationParams{1.2, 0.7, 512, 1}.validate()), ConfigError);
  EXPECT_THROW((GenerationParams{0.9, 0.0, 512, 1}.validate()), ConfigError);
}

// Fails a fixed number of times, then answers.
class FlakyCollector : public CollectorBackend {
 public:
  FlakyCollector(int malformed, int transport) : malformed_(malformed), transport_(transport) {}
  BackendCapabilities capabilities() const override { return {}; }
  GenerationResult generate(const CollectorInput&, const GenerationParams& p) const override {
    seeds.push_back(p.seed);
    const int n = calls++;
    if (n < malformed_) return {"<user> nope", std::nullopt};
    if (n < malformed_ + transport_) throw BackendError("connection reset", true);
    return {"<system> hi <user> ok", std::vector<double>{-0.5, -1.5}};
  }
  mutable int calls = 0;
  mutable std::vector<std::uint64_t> seeds;

 private:
  int malformed_;
  int transport_;
};

TEST(GenerateWithRetry, RecoversWithinBudget) {
  FlakyCollector b(2, 1);
  CollectorInput in = serialize_input(graffiti_goal(), {});
  auto out = generate_with_retry(b, in, {0.9, 1.0, 512, 42}, 3);
  ASSERT_TRUE(out.dialogue);
  EXPECT_EQ(out.attempts, 4);
  EXPECT_EQ(out.failures.size(), 3u);
  // Every attempt samples with its own seed.
  EXPECT_EQ(std::set<std::uint64_t>(b.seeds.begin(), b.seeds.end()).size(), 4u);
  EXPECT_EQ(b.seeds[0], 42u);
  EXPECT_EQ(out.seed, b.seeds.back());
  ASSERT_TRUE(out.token_logprobs);
}

TEST(GenerateWithRetry, ExhaustsBudget) {
  FlakyCollector b(10, 0);
  CollectorInput in = serialize_input(graffiti_goal(), {});
  auto out = generate_with_retry(b, in, {0.9, 1.0, 512, 42}, 3);
  EXPECT_FALSE(out.dialogue);
  EXPECT_EQ(out.attempts, 4);
}

class ProtocolBreaker : public CollectorBackend {
 public:
  BackendCapabilities capabilities() const override { return {}; }
  GenerationResult generate(const CollectorInput&, const GenerationParams&) const override {
    throw ProtocolError("bad body");
  }
};

TEST(GenerateWithRetry, ProtocolErrorsAreFatal) {
  ProtocolBreaker b;
  EXPECT_THROW(generate_with_retry(b, serialize_input(graffiti_goal(), {}), {}, 3), ProtocolError);
}

TEST(GenerateWithRetry, InputCap) {
  FlakyCollector b(0, 0);
  GoalInstruction g;
  for (int i = 0; i < 800; ++i) g.text += "w ";
  EXPECT_THROW(generate_with_retry(b, serialize_input(g, {}), {}, 0), ValidationError);
}

// ---- surrogate ----

TEST(Surrogate, GraffitiMentions) {
  const Schema& s = default_multiwoz_schema();
  CollectorInput in = serialize_input(graffiti_goal(), graffiti_api());
  Dialogue d = surrogate_generate(in, {0.92, 0.7, 512, 7}, s);
  std::string all;
  bool system_names_graffiti = false;
  for (const auto& t : d.turns) {
    all += t.system + " " + t.user + " ";
    if (t.system.find("graffiti") != std::string::npos) system_names_graffiti = true;
  }
  EXPECT_TRUE(system_names_graffiti);
  EXPECT_NE(all.find("expensive"), std::string::npos);
  EXPECT_NE(all.find("british"), std::string::npos);
}

TEST(Surrogate, OnePairNoApi) {
  const Schema& s = default_multiwoz_schema();
  GoalInstruction g;
  g.text = "a museum";
  g.explicit_pairs = {{"attraction-type", "museum"}};
  g.domains = {"attraction"};
  Dialogue d = surrogate_generate(serialize_input(g, {}), {0.9, 1.0, 512, 1}, s);
  EXPECT_EQ(d.turns.size(), 1u);
}

TEST(Surrogate, DeterministicAndAlwaysParses) {
  const Schema& s = default_multiwoz_schema();
  Rng rng(99);
  KnowledgeBase kb = testing::random_kb(s, rng, 10);
  std::size_t checked = 0;
  while (checked < 1000) {
    GoalTemplate t = testing::random_template(rng, "p");
    APICallResultSet a;
    try {
      a = sample_api_results(t, kb, rng);
    } catch (const UnsatisfiableError&) {
      continue;
    }
    GoalInstruction g = instantiate(t, a, s, rng);
    CollectorInput in = serialize_input(g, a);
    GenerationParams p{0.92, 0.9, 512, rng.next()};
    Dialogue d1 = surrogate_generate(in, p, s);
    Dialogue d2 = surrogate_generate(in, p, s);
    ASSERT_EQ(d1.turns, d2.turns);
    ASSERT_FALSE(d1.turns.empty());
    ++checked;
  }
}

}  // namespace
}  // namespace wozsynth
