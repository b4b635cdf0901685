// state_candidate.cpp
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

#include "wozsynth/state_candidate.hpp"

#include <algorithm>

#include "wozsynth/errors.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

PairSet candidates_from_goal(const GoalInstruction& instruction, const Schema& schema) {
  PairSet out;
  for (const auto& p : instruction.explicit_pairs) {
    const SlotDef* def = schema.find_slot(p.first);
    if (def && def->informable()) out.insert(p);
  }
  return out;
}

PairSet candidates_from_api(const APICallResultSet& results, const Schema& schema) {
  PairSet out;
  for (const auto& inst : results.results)
    for (const auto& p : inst.pairs) {
      const SlotDef* def = schema.find_slot(p.first);
      if (def && def->informable()) out.insert(p);
    }
  return out;
}

StateCandidateSet build_candidates(const GoalInstruction& instruction,
                                   const APICallResultSet& results, const Schema& schema) {
  return {candidates_from_goal(instruction, schema), candidates_from_api(results, schema)};
}

StateCandidateSet candidates_from_states(const std::vector<TurnAnnotation>& states) {
  StateCandidateSet out;
  for (const auto& turn : states)
    for (const auto& [slot, value] : turn.state)
      if (!is_sentinel(value)) out.from_goal.insert({slot, value});
  return out;
}

bool is_none(const std::string& value) { return normalize_value(value) == "none"; }
bool is_dontcare(const std::string& value) { return normalize_value(value) == "dontcare"; }
bool is_sentinel(const std::string& value) { return is_none(value) || is_dontcare(value); }

OptionSet build_option_set(const StateCandidateSet& candidates, const SlotDef& slot) {
  if (!slot.informable())
    throw ValidationError("build_option_set: slot '" + slot.name + "' is requestable");
  OptionSet out{slot.name, {}};
  for (const auto& [s, v] : candidates.all()) {
    if (s != slot.name || is_sentinel(v)) continue;
    if (std::find(out.options.begin(), out.options.end(), v) == out.options.end())
      out.options.push_back(v);
  }
  out.options.emplace_back(kDontcare);
  out.options.emplace_back(kNone);
  return out;
}

}  // namespace wozsynth
