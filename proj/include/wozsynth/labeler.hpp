// labeler.hpp
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
// Multiple-choice annotation: per turn, one question per informable slot
// plus one active-domain question, each scored over its own option list.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wozsynth/schema_kb.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

inline constexpr const char* kDomainQuestion = "what is the domain or topic of current turn?";
inline constexpr std::size_t kLabelerMaxContext = 512;
inline constexpr double kDefaultBeta = 5.0;

struct LabelerConfig {
  std::vector<std::string> domain_options;  // e.g. Attraction, Hotel, ...
  std::string domain_question = kDomainQuestion;
  std::size_t max_context_symbols = kLabelerMaxContext;

  // Capitalized schema domain names in schema order.
  static LabelerConfig for_schema(const Schema& schema);
};

// Serializes turns [0, upto) as "<system> r1 <user> u1 ...". When the
// result exceeds max_symbols, whole exchanges are dropped from the front;
// if the latest exchange alone is too long its leading tokens are cut.
std::string serialize_context(const std::vector<Turn>& turns, std::size_t upto,
                              std::size_t max_symbols = kLabelerMaxContext);

struct MultipleChoiceQuery {
  std::string context;
  std::string question;
  std::vector<std::string> options;
  std::string slot;  // empty for the domain question

  // "<s> D_t </s> q </s> o_i </s>" for every option, in option order.
  std::vector<std::string> serialized_per_option() const;
};

// Throws ValidationError for a requestable slot or an empty context.
MultipleChoiceQuery build_slot_query(const std::string& context, const SlotDef& slot,
                                     const StateCandidateSet& candidates);
// Throws ConfigError when no domain options are configured.
MultipleChoiceQuery build_domain_query(const std::string& context, const LabelerConfig& config);

struct AnswerScores {
  std::vector<double> logits;
  std::vector<double> probabilities;
  std::size_t chosen_index = 0;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);
// First maximal index (ties go to the lower index).
std::size_t argmax(std::span<const double> values);

// Must tolerate concurrent calls.
class LabelerBackend {
 public:
  virtual ~LabelerBackend() = default;
  // One logit per option.
  virtual std::vector<double> score(const std::string& context, const std::string& question,
                                    const std::vector<std::string>& options) const = 0;
};

// Throws ValidationError on an empty option list, ProtocolError on a logit
// count that differs from the option count.
AnswerScores score(const LabelerBackend& backend, const MultipleChoiceQuery& query);

struct DialogueAnnotation {
  std::vector<TurnAnnotation> turns;
  std::size_t queries = 0;
};

// Issues J slot queries + 1 domain query for every turn. "None" answers are
// left out of the state map.
DialogueAnnotation annotate_dialogue(const Dialogue& dialogue, const StateCandidateSet& candidates,
                                     const Schema& schema, const LabelerBackend& backend,
                                     const LabelerConfig& config);

}  // namespace wozsynth
