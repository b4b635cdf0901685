// training.cpp
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

#include "wozsynth/training.hpp"

#include "json.hpp"
#include "wozsynth/collector.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

CollectorExample collector_training_example(const AnnotatedDialogue& dialogue) {
  if (!dialogue.goal)
    throw ValidationError("dialogue " + dialogue.id + ": no goal instruction for a Collector example");
  CollectorExample ex;
  ex.source = serialize_input(*dialogue.goal, dialogue.api).text;
  ex.target = render_dialogue(dialogue.dialogue.turns);
  ex.target_tokens = count_tokens(ex.target);
  return ex;
}

CollectorTraining emit_collector_training(const Corpus& corpus) {
  CollectorTraining out;
  ojson header = {{"format", "wozsynth-collector-train"},
                  {"version", 1},
                  {"label_smoothing", kLabelSmoothing}};
  out.jsonl = header.dump() + "\n";
  for (const auto& d : corpus) {
    CollectorExample ex = collector_training_example(d);
    const bool over = count_tokens(ex.source) > kCollectorMaxSource;
    ojson rec;
    rec["source"] = ex.source;
    rec["target"] = ex.target;
    rec["meta"] = {{"dialogue_id", d.id},
                   {"target_tokens", ex.target_tokens},
                   {"label_smoothing", kLabelSmoothing},
                   {"source_over_cap", over}};
    out.jsonl += rec.dump();
    out.jsonl += '\n';
    ++out.manifest.dialogues;
    out.manifest.target_tokens += ex.target_tokens;
    if (over) ++out.manifest.sources_over_cap;
  }
  return out;
}

namespace {

std::size_t find_answer(const std::vector<std::string>& options, const std::string& gold) {
  const std::string g = normalize_value(gold);
  for (std::size_t i = 0; i < options.size(); ++i)
    if (normalize_value(options[i]) == g) return i;
  return options.size();
}

}  // namespace

LabelerTraining emit_labeler_training(const Corpus& corpus, const Schema& schema,
                                      const LabelerConfig& config, double beta) {
  if (!(beta >= 1.0)) throw ConfigError("beta must be at least 1");
  LabelerTraining out;
  out.manifest.beta = beta;
  ojson header = {{"format", "wozsynth-labeler-train"}, {"version", 1}, {"beta", beta}};
  out.jsonl = header.dump() + "\n";
  auto emit = [&](const MultipleChoiceQuery& q, std::size_t answer, const AnnotatedDialogue& d,
                  std::size_t t) {
    const bool none = is_none(q.options[answer]);
    ojson rec;
    rec["context"] = q.context;
    rec["question"] = q.question;
    rec["options"] = q.options;
    rec["answer_index"] = answer;
    rec["weight"] = none ? 1.0 : beta;
    rec["dialogue_id"] = d.id;
    rec["turn_idx"] = t + 1;
    rec["slot"] = q.slot;
    out.jsonl += rec.dump();
    out.jsonl += '\n';
    ++out.manifest.records;
    if (none) ++out.manifest.none_answers;
    else ++out.manifest.non_none_answers;
  };

  for (const auto& d : corpus) {
    if (d.annotations.size() != d.dialogue.turns.size())
      throw ValidationError("dialogue " + d.id + ": " + std::to_string(d.annotations.size()) +
                            " states for " + std::to_string(d.dialogue.turns.size()) + " turns");
    const StateCandidateSet cands = candidates_from_states(d.annotations);
    ++out.manifest.dialogues;
    for (std::size_t t = 0; t < d.dialogue.turns.size(); ++t) {
      ++out.manifest.turns;
      const std::string context = serialize_context(d.dialogue.turns, t + 1, config.max_context_symbols);
      const DialogueState& state = d.annotations[t].state;
      for (const SlotDef* slot : schema.informable_slots()) {
        MultipleChoiceQuery q = build_slot_query(context, *slot, cands);
        auto it = state.find(slot->name);
        const std::string gold = it == state.end() ? std::string(kNone) : it->second;
        const std::size_t answer = find_answer(q.options, gold);
        if (answer == q.options.size())
          throw ValidationError("dialogue " + d.id + " turn " + std::to_string(t + 1) + ": gold value '" +
                                gold + "' for " + slot->name + " is not among the options");
        emit(q, answer, d, t);
      }
      MultipleChoiceQuery dq = build_domain_query(context, config);
      const std::size_t answer = find_answer(dq.options, d.annotations[t].active_domain);
      if (answer == dq.options.size()) {
        ++out.manifest.skipped_domain_questions;
        continue;
      }
      emit(dq, answer, d, t);
    }
  }
  return out;
}

std::string manifest_json(const CollectorManifest& m) {
  ojson j = {{"kind", "collector"},
             {"dialogues", m.dialogues},
             {"target_tokens", m.target_tokens},
             {"sources_over_cap", m.sources_over_cap},
             {"max_source_symbols", kCollectorMaxSource},
             {"label_smoothing", m.label_smoothing}};
  return j.dump(2) + "\n";
}

std::string manifest_json(const LabelerManifest& m) {
  ojson j = {{"kind", "labeler"},
             {"dialogues", m.dialogues},
             {"turns", m.turns},
             {"records", m.records},
             {"beta", m.beta},
             {"none_answers", m.none_answers},
             {"non_none_answers", m.non_none_answers},
             {"none_to_non_none_ratio",
              m.non_none_answers ? static_cast<double>(m.none_answers) / m.non_none_answers : 0.0},
             {"skipped_domain_questions", m.skipped_domain_questions},
             {"max_context_symbols", kLabelerMaxContext}};
  return j.dump(2) + "\n";
}

}  // namespace wozsynth
