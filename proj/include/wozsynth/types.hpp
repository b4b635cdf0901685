// types.hpp
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
// Value types shared across the pipeline: goals, API results, candidate
// sets, dialogues and their annotations.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wozsynth/schema_kb.hpp"

namespace wozsynth {

// Insertion-ordered set of slot-value pairs.
class PairSet {
 public:
  PairSet() = default;
  PairSet(std::initializer_list<SlotValue> init) {
    for (const auto& p : init) insert(p);
  }

  bool insert(const SlotValue& p) {
    if (contains(p)) return false;
    items_.push_back(p);
    return true;
  }
  bool contains(const SlotValue& p) const {
    return std::find(items_.begin(), items_.end(), p) != items_.end();
  }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<SlotValue>& items() const { return items_; }

  friend bool operator==(const PairSet&, const PairSet&) = default;

 private:
  std::vector<SlotValue> items_;
};

// Dialogue state B_t: informable slot -> value. Absent slots mean "None".
using DialogueState = std::map<std::string, std::string>;

inline constexpr const char* kDontcare = "Dontcare";
inline constexpr const char* kNone = "None";

struct GoalInstruction {
  std::string text;
  PairSet explicit_pairs;  // goal candidates
  std::string template_id;
  std::vector<std::string> domains;

  friend bool operator==(const GoalInstruction&, const GoalInstruction&) = default;
};

// API call results A, at most three KB instances.
struct APICallResultSet {
  std::vector<KBInstance> results;
  // Template domain each result serves (parallel to results).
  std::vector<std::string> serves;

  std::size_t size() const { return results.size(); }
  bool empty() const { return results.empty(); }
};

inline constexpr std::size_t kMaxApiResults = 3;

// Candidate pairs: goal pairs plus API pairs.
struct StateCandidateSet {
  PairSet from_goal;
  PairSet from_api;

  // Goal pairs first, then API pairs, duplicates dropped.
  PairSet all() const {
    PairSet out = from_goal;
    for (const auto& p : from_api) out.insert(p);
    return out;
  }
};

struct Turn {
  std::string system;  // system response opening the turn
  std::string user;    // user utterance
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::vector<Turn> turns;
  std::string raw_text;
};

struct TurnAnnotation {
  DialogueState state;
  std::string active_domain;
  friend bool operator==(const TurnAnnotation&, const TurnAnnotation&) = default;
};

struct Provenance {
  std::string source;  // "synthesized" or "multiwoz"
  std::string template_id;
  std::uint64_t seed = 0;             // draw seed
  std::uint64_t generation_seed = 0;  // seed of the accepted Collector call
  double top_p = 0.0;
  double temperature = 0.0;
  int max_tokens = 0;
  int attempts = 0;
  std::string split;  // train/val/test for ingested corpora
};

struct AnnotatedDialogue {
  std::string id;
  std::vector<std::string> domains;  // domain tags
  Dialogue dialogue;
  std::vector<TurnAnnotation> annotations;
  std::optional<GoalInstruction> goal;
  APICallResultSet api;
  StateCandidateSet candidates;
  Provenance provenance;

  bool has_domain(const std::string& d) const {
    return std::find(domains.begin(), domains.end(), d) != domains.end();
  }
};

using Corpus = std::vector<AnnotatedDialogue>;

}  // namespace wozsynth
