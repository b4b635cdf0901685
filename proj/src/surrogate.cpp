// surrogate.cpp
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

#include "wozsynth/surrogate.hpp"

#include <array>

#include "wozsynth/rng.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

namespace {

constexpr std::array<const char*, 3> kGreetings = {
    "hello , how can i help you today ?",
    "welcome to the cambridge towninfo centre . what can i do for you ?",
    "hi there , what are you looking for ?",
};
constexpr std::array<const char*, 3> kAcks = {
    "sure , anything else ?",
    "okay , i have noted that . what else ?",
    "certainly . is there anything more ?",
};
constexpr std::array<const char*, 3> kOpeners = {
    "i am looking for a place where",
    "please note that",
    "i would like it if",
};
constexpr std::array<const char*, 2> kClosings = {
    "that sounds great , thank you .",
    "perfect , that is all i need .",
};

std::string mention(const SlotValue& p) {
  return mention_phrase(p.first) + " is " + p.second;
}

}  // namespace

std::string mention_phrase(const std::string& slot) {
  return slot_domain(slot) + " " + slot_suffix(slot);
}

std::string domain_opening_phrase(const std::string& domain) {
  return "i need help with the " + domain;
}

SurrogatePlan plan_surrogate_dialogue(const CollectorInput& input, const GenerationParams& params,
                                      const Schema& schema) {
  Rng rng(derive_seed(params.seed, {fnv1a64(input.text)}));
  const PairSet goal = candidates_from_goal(input.goal, schema);
  const PairSet api = candidates_from_api(input.api, schema);

  std::vector<SlotValue> api_only;
  std::vector<SlotValue> api_names;
  for (const auto& p : api) {
    if (goal.contains(p)) continue;
    api_only.push_back(p);
    if (slot_suffix(p.first) == "name") api_names.push_back(p);
  }
  std::optional<SlotValue> recommended;
  if (!api_names.empty()) recommended = api_names[rng.uniform_index(api_names.size())];
  else if (!api_only.empty()) recommended = api_only[rng.uniform_index(api_only.size())];

  // Goal pairs go to user turns, one or two at a time, in order.
  std::vector<std::vector<SlotValue>> groups;
  const auto& items = goal.items();
  for (std::size_t i = 0; i < items.size();) {
    std::size_t take = (items.size() - i >= 2 && rng.uniform_index(2) == 1) ? 2 : 1;
    groups.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                        items.begin() + static_cast<std::ptrdiff_t>(i + take));
    i += take;
  }

  std::string opening_domain;
  if (!input.goal.domains.empty()) opening_domain = input.goal.domains.front();
  else if (!input.api.empty()) opening_domain = input.api.results.front().domain;

  SurrogatePlan plan;
  DialogueState state;
  std::string active;
  auto commit = [&](const std::vector<SlotValue>& mentioned, const std::string& fallback_domain) {
    for (const auto& [slot, value] : mentioned) state[slot] = value;
    if (!mentioned.empty()) active = capitalize(slot_domain(mentioned.back().first));
    else if (!fallback_domain.empty()) active = capitalize(fallback_domain);
    plan.gold.push_back({state, active});
  };

  const std::size_t exchanges = std::max<std::size_t>(1, groups.size()) + (recommended ? 1 : 0);
  for (std::size_t e = 0; e < exchanges; ++e) {
    Turn turn;
    std::vector<SlotValue> mentioned;
    std::string fallback;
    // exchanges >= 2 whenever there is a recommendation, so it never lands
    // on the greeting turn.
    const bool recommend_turn = recommended && e + 1 == exchanges;
    if (e == 0) {
      turn.system = kGreetings[rng.uniform_index(kGreetings.size())];
    } else if (recommend_turn) {
      turn.system = "i recommend this option : " + mention(*recommended) + " .";
      mentioned.push_back(*recommended);
    } else {
      turn.system = kAcks[rng.uniform_index(kAcks.size())];
    }

    if (recommend_turn) {
      turn.user = kClosings[rng.uniform_index(kClosings.size())];
    } else if (e < groups.size()) {
      std::string u;
      if (e == 0 && !opening_domain.empty()) u = domain_opening_phrase(opening_domain) + " . ";
      u += kOpeners[rng.uniform_index(kOpeners.size())];
      for (std::size_t k = 0; k < groups[e].size(); ++k) {
        u += k ? " and " : " ";
        u += mention(groups[e][k]);
        mentioned.push_back(groups[e][k]);
      }
      u += " .";
      turn.user = u;
    } else {
      turn.user = opening_domain.empty() ? std::string("i need some help .")
                                         : domain_opening_phrase(opening_domain) + " .";
      fallback = opening_domain;
    }
    plan.turns.push_back(turn);
    commit(mentioned, fallback);
  }
  return plan;
}

BackendCapabilities SurrogateCollector::capabilities() const {
  BackendCapabilities caps;
  caps.max_input_symbols = static_cast<std::size_t>(-1);
  caps.returns_logprobs = false;
  caps.deterministic = true;
  return caps;
}

GenerationResult SurrogateCollector::generate(const CollectorInput& input,
                                              const GenerationParams& params) const {
  return {render_dialogue(plan_surrogate_dialogue(input, params, schema_).turns), std::nullopt};
}

Dialogue surrogate_generate(const CollectorInput& input, const GenerationParams& params,
                            const Schema& schema) {
  return parse_generated(SurrogateCollector(schema).generate(input, params).text);
}

}  // namespace wozsynth
