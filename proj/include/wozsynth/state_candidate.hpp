// state_candidate.hpp
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
#include <vector>

#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

// Answer options O_S for one slot: candidate values in first-seen order,
// then "Dontcare" and "None".
struct OptionSet {
  std::string slot;
  std::vector<std::string> options;
};

// Goal candidates: the instruction's explicit pairs restricted to informable slots.
PairSet candidates_from_goal(const GoalInstruction& instruction, const Schema& schema);

// API candidates: every informable pair of every API result.
PairSet candidates_from_api(const APICallResultSet& results, const Schema& schema);

StateCandidateSet build_candidates(const GoalInstruction& instruction,
                                   const APICallResultSet& results, const Schema& schema);

// Candidates drawn from gold states B_1..B_T (the training-time rule).
StateCandidateSet candidates_from_states(const std::vector<TurnAnnotation>& states);

// Throws ValidationError for an unknown or requestable slot.
OptionSet build_option_set(const StateCandidateSet& candidates, const SlotDef& slot);

bool is_sentinel(const std::string& value);
bool is_none(const std::string& value);
bool is_dontcare(const std::string& value);

}  // namespace wozsynth
