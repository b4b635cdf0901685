// dst_eval.hpp
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
// DST metrics. Values are compared after lowercasing and whitespace
// collapsing; an absent slot, an empty value and "None" are the same
// thing. The *_serial functions are plain loops kept as references for
// the OpenMP versions.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wozsynth/labeler.hpp"
#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

using TurnKey = std::pair<std::string, std::size_t>;  // (dialogue id, turn index from 1)

struct PredictionSet {
  std::map<TurnKey, DialogueState> turns;

  // Throws ValidationError on a duplicate key or a zero turn index.
  void add(const std::string& dialogue_id, std::size_t turn_idx, DialogueState state);
  // Throws ValidationError unless every dialogue's turns run 1..T.
  void validate() const;
  std::size_t size() const { return turns.size(); }
};

PredictionSet prediction_set_from_corpus(const Corpus& corpus);
// Lines {dialogue_id, turn_idx, state} ("belief_state" is accepted too).
PredictionSet parse_predictions_jsonl(const std::string& text);
PredictionSet load_predictions(const std::string& path);

// Drops None/empty values and normalizes the rest.
DialogueState normalize_state(const DialogueState& state);
bool states_match(const DialogueState& a, const DialogueState& b);

// Both throw ValidationError when the key sets differ (the message lists
// the first missing and extra keys) or when there is nothing to score.
double joint_goal_accuracy(const PredictionSet& preds, const PredictionSet& golds);
double slot_accuracy(const PredictionSet& preds, const PredictionSet& golds,
                     const std::vector<std::string>& slots);
double joint_goal_accuracy_serial(const PredictionSet& preds, const PredictionSet& golds);
double slot_accuracy_serial(const PredictionSet& preds, const PredictionSet& golds,
                            const std::vector<std::string>& slots);

std::map<std::string, double> per_slot_accuracy(const PredictionSet& preds,
                                                const PredictionSet& golds,
                                                const std::vector<std::string>& slots);

struct DomainScore {
  double joint_goal_accuracy = 0.0;
  double slot_accuracy = 0.0;
  std::size_t turns = 0;
  std::size_t dialogues = 0;
};

struct EvalReport {
  double joint_goal_accuracy = 0.0;
  double slot_accuracy = 0.0;
  std::map<std::string, double> per_slot_accuracy;
  std::map<std::string, DomainScore> per_domain;
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t slots = 0;
};

// Per-domain scores restrict states to the domain's informable slots and
// cover the dialogues tagged with the domain. Without tags a dialogue
// counts for a domain when its gold states ever fill one of its slots.
EvalReport evaluate(const PredictionSet& preds, const PredictionSet& golds, const Schema& schema,
                    const std::map<std::string, std::vector<std::string>>* tags = nullptr);

std::string report_to_json(const EvalReport& report,
                           const std::optional<double>& coverage = std::nullopt);
std::string report_to_text(const EvalReport& report);
std::string per_slot_csv(const EvalReport& report);

// zero / full. Throws ValidationError when full <= 0.
double zero_shot_coverage(double zero_acc, double full_acc);

struct IntrinsicReport {
  double joint_goal_accuracy = 0.0;
  double domain_accuracy = 0.0;
  std::map<std::string, DomainScore> per_domain;
  std::size_t turns = 0;
};

// Annotates gold dialogues with option sets built from their own gold
// states, then scores the result against those states.
IntrinsicReport labeler_intrinsic_eval(const Corpus& gold, const Schema& schema,
                                       const LabelerBackend& backend, const LabelerConfig& config);

struct CorpusStats {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t tokens = 0;  // whitespace tokens over all utterances
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats corpus_stats(const Corpus& corpus);
CorpusStats corpus_stats_serial(const Corpus& corpus);

// exp(-mean log-probability) over all tokens; nullopt without tokens.
std::optional<double> perplexity(const std::vector<std::vector<double>>& token_logprobs);

}  // namespace wozsynth
