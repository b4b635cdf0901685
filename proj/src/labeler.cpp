// labeler.cpp
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

#include "wozsynth/labeler.hpp"

#include <algorithm>
#include <cmath>

#include "wozsynth/collector.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

LabelerConfig LabelerConfig::for_schema(const Schema& schema) {
  LabelerConfig config;
  for (const auto& d : schema.domain_names()) config.domain_options.push_back(capitalize(d));
  return config;
}

std::string serialize_context(const std::vector<Turn>& turns, std::size_t upto,
                              std::size_t max_symbols) {
  upto = std::min(upto, turns.size());
  std::size_t first = 0;
  std::string out;
  for (;;) {
    out = render_dialogue(std::vector<Turn>(turns.begin() + static_cast<std::ptrdiff_t>(first),
                                            turns.begin() + static_cast<std::ptrdiff_t>(upto)));
    if (count_tokens(out) <= max_symbols || first + 1 >= upto) break;
    ++first;
  }
  if (count_tokens(out) > max_symbols) out = keep_last_tokens(out, max_symbols);
  return out;
}

std::vector<std::string> MultipleChoiceQuery::serialized_per_option() const {
  std::vector<std::string> out;
  out.reserve(options.size());
  const std::string prefix = std::string(tok::kStart) + " " + context + " " +
                             std::string(tok::kSep) + " " + escape_text(question) + " " +
                             std::string(tok::kSep) + " ";
  for (const auto& o : options) out.push_back(prefix + escape_text(o) + " " + std::string(tok::kSep));
  return out;
}

MultipleChoiceQuery build_slot_query(const std::string& context, const SlotDef& slot,
                                     const StateCandidateSet& candidates) {
  if (!slot.informable())
    throw ValidationError("build_slot_query: slot '" + slot.name + "' is requestable");
  if (context.empty()) throw ValidationError("build_slot_query: empty dialogue context");
  OptionSet opts = build_option_set(candidates, slot);
  return {context, slot.description, std::move(opts.options), slot.name};
}

MultipleChoiceQuery build_domain_query(const std::string& context, const LabelerConfig& config) {
  if (config.domain_options.empty()) throw ConfigError("no active-domain options configured");
  if (context.empty()) throw ValidationError("build_domain_query: empty dialogue context");
  return {context, config.domain_question, config.domain_options, {}};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

AnswerScores score(const LabelerBackend& backend, const MultipleChoiceQuery& query) {
  if (query.options.empty()) throw ValidationError("score: query has no options");
  AnswerScores out;
  out.logits = backend.score(query.context, query.question, query.options);
  if (out.logits.size() != query.options.size())
    throw ProtocolError("labeler backend returned " + std::to_string(out.logits.size()) +
                        " logits for " + std::to_string(query.options.size()) + " options");
  for (double l : out.logits)
    if (!std::isfinite(l)) throw ProtocolError("labeler backend returned a non-finite logit");
  out.probabilities = softmax(out.logits);
  out.chosen_index = argmax(out.logits);
  return out;
}

DialogueAnnotation annotate_dialogue(const Dialogue& dialogue, const StateCandidateSet& candidates,
                                     const Schema& schema, const LabelerBackend& backend,
                                     const LabelerConfig& config) {
  DialogueAnnotation out;
  const auto& slots = schema.informable_slots();
  for (std::size_t t = 1; t <= dialogue.turns.size(); ++t) {
    const std::string context = serialize_context(dialogue.turns, t, config.max_context_symbols);
    TurnAnnotation ann;
    for (const SlotDef* slot : slots) {
      MultipleChoiceQuery q = build_slot_query(context, *slot, candidates);
      AnswerScores s = score(backend, q);
      ++out.queries;
      const std::string& answer = q.options[s.chosen_index];
      if (!is_none(answer)) ann.state[slot->name] = is_dontcare(answer) ? kDontcare : answer;
    }
    MultipleChoiceQuery dq = build_domain_query(context, config);
    AnswerScores ds = score(backend, dq);
    ++out.queries;
    ann.active_domain = dq.options[ds.chosen_index];
    out.turns.push_back(std::move(ann));
  }
  return out;
}

}  // namespace wozsynth
