// test_goal_engine.cpp
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

#include <set>

#include "test_support.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/goal_engine.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {
namespace {

const char* kGraffitiGoal =
    "you are looking for a restaurant . the restaurant should be in the expensive price range "
    "and should serve british food . once you find a restaurant , make sure you get the phone";

GoalInstruction graffiti_goal() {
  GoalInstruction g;
  g.text = kGraffitiGoal;
  g.explicit_pairs = {{"restaurant-pricerange", "expensive"}, {"restaurant-food", "british"}};
  g.template_id = "fig1";
  g.domains = {"restaurant"};
  return g;
}

KBInstance restaurant(const std::string& name, const std::string& food, const std::string& price,
                      const std::string& area) {
  return {"restaurant", {{"restaurant-name", name}, {"restaurant-food", food},
                         {"restaurant-pricerange", price}, {"restaurant-area", area}}};
}

KBInstance hotel(const std::string& name, const std::string& area) {
  return {"hotel", {{"hotel-name", name}, {"hotel-area", area}}};
}

TEST(Delexicalize, Graffiti) {
  GoalTemplate t = delexicalize(graffiti_goal());
  EXPECT_NE(t.text.find("the [restaurant-pricerange] price range"), std::string::npos);
  EXPECT_NE(t.text.find("serve [restaurant-food] food"), std::string::npos);
  EXPECT_EQ(t.text.find("expensive"), std::string::npos);
  EXPECT_EQ(t.text.find("british"), std::string::npos);
  EXPECT_EQ(t.placeholder_slots,
            (std::vector<std::string>{"restaurant-pricerange", "restaurant-food"}));
  EXPECT_EQ(t.domains, std::vector<std::string>{"restaurant"});
}

TEST(Delexicalize, NoPairsIsIdentity) {
  GoalInstruction g;
  g.text = "just chatting about nothing";
  EXPECT_EQ(delexicalize(g).text, g.text);
}

TEST(Delexicalize, WordBoundariesAndLongestMatch) {
  GoalInstruction g;
  g.text = "a north star hotel in the north , for 2 people at 12:20";
  g.explicit_pairs = {{"hotel-name", "north star hotel"}, {"hotel-area", "north"},
                      {"hotel-book people", "2"}};
  GoalTemplate t = delexicalize(g);
  EXPECT_EQ(t.text, "a [hotel-name] in the [hotel-area] , for [hotel-book people] people at 12:20");
}

TEST(Delexicalize, MissingValueThrows) {
  GoalInstruction g = graffiti_goal();
  g.explicit_pairs.insert({"restaurant-area", "centre"});
  EXPECT_THROW(delexicalize(g), ValidationError);
}

TEST(Delexicalize, LiteralBracketsEscaped) {
  GoalInstruction g;
  g.text = "note [this] is british";
  g.explicit_pairs = {{"restaurant-food", "british"}};
  GoalTemplate t = delexicalize(g);
  EXPECT_EQ(render_template(t.text, {{"restaurant-food", "british"}}), g.text);
}

TEST(Delexicalize, RandomPlantedRoundTrip) {
  Rng rng(5);
  const std::vector<std::string> fillers = {"please", "find", "me", "a", "place", "with", "and"};
  const std::vector<std::pair<std::string, std::vector<std::string>>> slots = {
      {"restaurant-food", {"italian", "thai", "british"}},
      {"restaurant-area", {"north", "south", "centre"}},
      {"hotel-book people", {"1", "2", "3"}},
      {"hotel-name", {"acorn guest house", "gonville hotel"}}};
  for (int round = 0; round < 10; ++round) {
    GoalInstruction g;
    for (const auto& [slot, values] : slots) {
      if (rng.uniform_index(2) == 0) continue;
      const std::string& v = values[rng.uniform_index(values.size())];
      for (int k = 0; k < 3; ++k) g.text += fillers[rng.uniform_index(fillers.size())] + " ";
      g.text += v + " ";
      g.explicit_pairs.insert({slot, v});
    }
    g.text += "thanks";
    GoalTemplate t = delexicalize(g);
    std::map<std::string, std::string> values;
    for (const auto& [s, v] : g.explicit_pairs) values[s] = v;
    EXPECT_EQ(render_template(t.text, values), g.text);
  }
}

TEST(Template, PlaceholderParsing) {
  auto ph = template_placeholders("at [restaurant-book time] or [restaurant-book time#2] [[x]");
  ASSERT_EQ(ph.size(), 2u);
  EXPECT_EQ(ph[1].slot, "restaurant-book time");
  EXPECT_EQ(ph[1].index, 2);
  EXPECT_EQ(render_template("[[a] [x-y]", {{"x-y", "v"}}), "[a] v");
  EXPECT_THROW(render_template("[x-y]", {}), ValidationError);
}

TEST(Sampling, SharedAreaHolds) {
  const Schema& s = default_multiwoz_schema();
  KnowledgeBase kb(s, {restaurant("r1", "thai", "cheap", "north"),
                       restaurant("r2", "thai", "cheap", "south"), hotel("h1", "south"),
                       hotel("h2", "east")});
  GoalTemplate t;
  t.id = "rh";
  t.text = "eat [restaurant-food] , sleep in the [hotel-area]";
  t.domains = {"restaurant", "hotel"};
  t.shared_constraints = {{"restaurant", "restaurant-area", "hotel", "hotel-area"}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    APICallResultSet a = sample_api_results(t, kb, rng);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(*a.results[0].value_of("restaurant-area"), *a.results[1].value_of("hotel-area"));
    EXPECT_TRUE(satisfies_constraints(t, a));
  }
}

TEST(Sampling, SingleInstanceDomain) {
  const Schema& s = default_multiwoz_schema();
  KnowledgeBase kb(s, {restaurant("only", "thai", "cheap", "north")});
  GoalTemplate t{"one", "[restaurant-food]", {"restaurant"}, {"restaurant-food"}, {}, {}};
  Rng rng(1);
  auto a = sample_api_results(t, kb, rng);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(*a.results[0].value_of("restaurant-name"), "only");
}

TEST(Sampling, MatchesExhaustiveEnumeration) {
  const Schema& s = default_multiwoz_schema();
  std::vector<KBInstance> rs = {restaurant("r1", "thai", "cheap", "north"),
                                restaurant("r2", "thai", "cheap", "south"),
                                restaurant("r3", "thai", "cheap", "east")};
  std::vector<KBInstance> hs = {hotel("h1", "south"), hotel("h2", "north"), hotel("h3", "south")};
  std::vector<KBInstance> all = rs;
  all.insert(all.end(), hs.begin(), hs.end());
  KnowledgeBase kb(s, all);
  GoalTemplate t{"rh", "[restaurant-area] [hotel-area]", {"restaurant", "hotel"},
                 {"restaurant-area", "hotel-area"},
                 {{"restaurant", "restaurant-area", "hotel", "hotel-area"}}, {}};
  std::set<std::pair<std::string, std::string>> valid;
  for (const auto& r : rs)
    for (const auto& h : hs)
      if (*r.value_of("restaurant-area") == *h.value_of("hotel-area"))
        valid.insert({*r.value_of("restaurant-name"), *h.value_of("hotel-name")});
  std::set<std::pair<std::string, std::string>> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    auto a = sample_api_results(t, kb, rng);
    std::pair<std::string, std::string> p{*a.results[0].value_of("restaurant-name"),
                                          *a.results[1].value_of("hotel-name")};
    ASSERT_TRUE(valid.count(p)) << p.first << "/" << p.second;
    seen.insert(p);
  }
  EXPECT_EQ(seen, valid);
}

TEST(Sampling, UnsatisfiableAndEmpty) {
  const Schema& s = default_multiwoz_schema();
  KnowledgeBase kb(s, {restaurant("r1", "thai", "cheap", "north"), hotel("h1", "south")});
  GoalTemplate t{"x", "[restaurant-area] [hotel-area]", {"restaurant", "hotel"},
                 {"restaurant-area", "hotel-area"},
                 {{"restaurant", "restaurant-area", "hotel", "hotel-area"}}, {}};
  Rng rng(3);
  EXPECT_THROW(sample_api_results(t, kb, rng), UnsatisfiableError);
  GoalTemplate a{"y", "[attraction-area]", {"attraction"}, {"attraction-area"}, {}, {}};
  EXPECT_THROW(sample_api_results(a, kb, rng), ValidationError);
}

TEST(Sampling, AtMostThreeResults) {
  const Schema& s = default_multiwoz_schema();
  Rng rng(2);
  KnowledgeBase kb = testing::random_kb(s, rng, 6);
  GoalTemplate t;
  t.id = "wide";
  t.text = "[restaurant-area] [hotel-area] [attraction-area] [train-day]";
  t.domains = {"restaurant", "hotel", "attraction", "train"};
  auto a = sample_api_results(t, kb, rng);
  EXPECT_EQ(a.size(), 3u);
}

TEST(Instantiate, Graffiti) {
  const Schema& s = default_multiwoz_schema();
  GoalTemplate t = delexicalize(graffiti_goal());
  APICallResultSet a;
  a.results.push_back(restaurant("graffiti", "british", "expensive", "west"));
  a.serves.push_back("restaurant");
  Rng rng(1);
  GoalInstruction g = instantiate(t, a, s, rng);
  EXPECT_EQ(g.text, kGraffitiGoal);
  EXPECT_TRUE(g.explicit_pairs.contains({"restaurant-pricerange", "expensive"}));
  EXPECT_TRUE(g.explicit_pairs.contains({"restaurant-food", "british"}));
}

TEST(Instantiate, NoPlaceholders) {
  const Schema& s = default_multiwoz_schema();
  GoalTemplate t{"plain", "nothing to fill", {"restaurant"}, {}, {}, {}};
  Rng rng(1);
  GoalInstruction g = instantiate(t, {}, s, rng);
  EXPECT_EQ(g.text, t.text);
  EXPECT_TRUE(g.explicit_pairs.empty());
}

TEST(Instantiate, Deterministic) {
  const Schema& s = default_multiwoz_schema();
  Rng kb_rng(8);
  KnowledgeBase kb = testing::random_kb(s, kb_rng, 8);
  Rng trng(9);
  GoalTemplate t = testing::random_template(trng, "det");
  std::string first;
  for (int run = 0; run < 100; ++run) {
    Rng rng(1234);
    auto a = sample_api_results(t, kb, rng);
    GoalInstruction g = instantiate(t, a, s, rng);
    if (run == 0) first = g.text;
    ASSERT_EQ(g.text, first);
  }
}

TEST(Instantiate, SecondValueDiffers) {
  const Schema& s = default_multiwoz_schema();
  GoalTemplate t{"two", "at [restaurant-book time] or else [restaurant-book time#2]",
                 {"restaurant"}, {"restaurant-book time"}, {}, {"restaurant-book time"}};
  APICallResultSet a;
  a.results.push_back(restaurant("r", "thai", "cheap", "north"));
  a.serves.push_back("restaurant");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    GoalInstruction g = instantiate(t, a, s, rng);
    ASSERT_EQ(g.explicit_pairs.size(), 2u);
    EXPECT_NE(g.explicit_pairs.items()[0].second, g.explicit_pairs.items()[1].second);
  }
}

TEST(Instantiate, UnresolvableSlot) {
  const Schema& s = default_multiwoz_schema();
  GoalTemplate t{"bad", "to [taxi-destination]", {"taxi"}, {"taxi-destination"}, {}, {}};
  Rng rng(1);
  EXPECT_THROW(instantiate(t, {}, s, rng), ValidationError);
}

TEST(Template, RandomTemplatesValidateAndSerialize) {
  const Schema& s = default_multiwoz_schema();
  Rng rng(77);
  std::vector<GoalTemplate> ts;
  for (int i = 0; i < 50; ++i) {
    ts.push_back(testing::random_template(rng, "r" + std::to_string(i)));
    EXPECT_NO_THROW(validate_template(ts.back(), s));
  }
  EXPECT_EQ(parse_templates(templates_to_json(ts)), ts);
}

TEST(Template, ValidationRejects) {
  const Schema& s = default_multiwoz_schema();
  EXPECT_THROW(validate_template({"a", "[hotel-area]", {"restaurant"}, {}, {}, {}}, s),
               ValidationError);
  EXPECT_THROW(validate_template({"b", "[hotel-colour]", {"hotel"}, {}, {}, {}}, s),
               ValidationError);
  EXPECT_THROW(validate_template({"c", "x", {}, {}, {}, {}}, s), ValidationError);
}

TEST(SharedConstraints, Extraction) {
  GoalInstruction g;
  g.domains = {"hotel", "taxi", "restaurant"};
  g.explicit_pairs = {{"hotel-name", "acorn guest house"}, {"taxi-departure", "acorn guest house"},
                      {"hotel-area", "north"}, {"restaurant-area", "north"},
                      {"restaurant-name", "acorn guest house"}};
  auto cs = extract_shared_constraints(g);
  auto has = [&](SharedConstraint c) { return std::find(cs.begin(), cs.end(), c) != cs.end(); };
  EXPECT_TRUE(has({"hotel", "hotel-name", "taxi", "taxi-departure"}));
  EXPECT_TRUE(has({"hotel", "hotel-area", "restaurant", "restaurant-area"}));
  // Two names never co-refer.
  EXPECT_FALSE(has({"hotel", "hotel-name", "restaurant", "restaurant-name"}));
}

}  // namespace
}  // namespace wozsynth
