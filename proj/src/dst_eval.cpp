// dst_eval.cpp
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

#include "wozsynth/dst_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

void PredictionSet::add(const std::string& dialogue_id, std::size_t turn_idx, DialogueState state) {
  if (turn_idx == 0) throw ValidationError("dialogue " + dialogue_id + ": turn indices start at 1");
  auto [it, fresh] = turns.emplace(TurnKey{dialogue_id, turn_idx}, std::move(state));
  if (!fresh)
    throw ValidationError("duplicate entry for dialogue " + dialogue_id + " turn " +
                          std::to_string(turn_idx));
}

void PredictionSet::validate() const {
  std::string current;
  std::size_t expect = 1;
  for (const auto& [key, state] : turns) {
    if (key.first != current) {
      current = key.first;
      expect = 1;
    }
    if (key.second != expect)
      throw ValidationError("dialogue " + current + ": turn " + std::to_string(expect) +
                            " missing (found " + std::to_string(key.second) + ")");
    ++expect;
  }
}

PredictionSet prediction_set_from_corpus(const Corpus& corpus) {
  PredictionSet out;
  for (const auto& d : corpus)
    for (std::size_t t = 0; t < d.annotations.size(); ++t) out.add(d.id, t + 1, d.annotations[t].state);
  return out;
}

PredictionSet parse_predictions_jsonl(const std::string& text) {
  PredictionSet out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (collapse_whitespace(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "predictions line " + std::to_string(line_no);
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("dialogue_id") || !j.contains("turn_idx"))
      throw ParseError(where + ": expected {dialogue_id, turn_idx, state}");
    const char* key = j.contains("state") ? "state" : "belief_state";
    if (!j.contains(key) || !j[key].is_object()) throw ParseError(where + ": missing state object");
    if (!j["dialogue_id"].is_string() || !j["turn_idx"].is_number_integer() ||
        j["turn_idx"].get<long long>() < 1)
      throw ParseError(where + ": bad dialogue_id or turn_idx");
    DialogueState state;
    for (auto it = j[key].begin(); it != j[key].end(); ++it) {
      if (!it->is_string()) throw ParseError(where + ": non-string value for " + it.key());
      state[it.key()] = it->get<std::string>();
    }
    try {
      out.add(j["dialogue_id"].get<std::string>(), j["turn_idx"].get<std::size_t>(), std::move(state));
    } catch (const ValidationError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  return out;
}

PredictionSet load_predictions(const std::string& path) {
  try {
    return parse_predictions_jsonl(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

DialogueState normalize_state(const DialogueState& state) {
  DialogueState out;
  for (const auto& [slot, value] : state) {
    std::string v = normalize_value(value);
    if (v.empty() || v == "none") continue;
    out[slot] = std::move(v);
  }
  return out;
}

bool states_match(const DialogueState& a, const DialogueState& b) {
  return normalize_state(a) == normalize_state(b);
}

namespace {

struct Aligned {
  std::vector<const DialogueState*> pred;
  std::vector<const DialogueState*> gold;
};

std::string key_str(const TurnKey& k) { return k.first + "#" + std::to_string(k.second); }

Aligned align(const PredictionSet& preds, const PredictionSet& golds) {
  Aligned out;
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  auto p = preds.turns.begin();
  auto g = golds.turns.begin();
  while (p != preds.turns.end() || g != golds.turns.end()) {
    if (g == golds.turns.end() || (p != preds.turns.end() && p->first < g->first)) {
      extra.push_back(key_str(p->first));
      ++p;
    } else if (p == preds.turns.end() || g->first < p->first) {
      missing.push_back(key_str(g->first));
      ++g;
    } else {
      out.pred.push_back(&p->second);
      out.gold.push_back(&g->second);
      ++p;
      ++g;
    }
  }
  if (!missing.empty() || !extra.empty()) {
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? ", " : "") + v[i];
      if (v.size() > 10) s += ", ... (" + std::to_string(v.size()) + " total)";
      return s;
    };
    std::string msg = "prediction/gold key mismatch";
    if (!missing.empty()) msg += "; missing predictions: " + list(missing);
    if (!extra.empty()) msg += "; predictions without gold: " + list(extra);
    throw ValidationError(msg);
  }
  if (out.pred.empty()) throw ValidationError("no turns to evaluate");
  return out;
}

const std::string& value_or_empty(const DialogueState& s, const std::string& slot) {
  static const std::string kEmpty;
  auto it = s.find(slot);
  return it == s.end() ? kEmpty : it->second;
}

std::size_t slot_hits(const DialogueState& p, const DialogueState& g,
                      const std::vector<std::string>& slots) {
  const DialogueState np = normalize_state(p);
  const DialogueState ng = normalize_state(g);
  std::size_t hits = 0;
  for (const auto& s : slots)
    if (value_or_empty(np, s) == value_or_empty(ng, s)) ++hits;
  return hits;
}

DialogueState restrict_to(const DialogueState& s, const std::set<std::string>& slots) {
  DialogueState out;
  for (const auto& [k, v] : s)
    if (slots.count(k)) out[k] = v;
  return out;
}

}  // namespace

double joint_goal_accuracy(const PredictionSet& preds, const PredictionSet& golds) {
  const Aligned a = align(preds, golds);
  const auto n = static_cast<std::ptrdiff_t>(a.pred.size());
  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    if (states_match(*a.pred[i], *a.gold[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

double joint_goal_accuracy_serial(const PredictionSet& preds, const PredictionSet& golds) {
  const Aligned a = align(preds, golds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.pred.size(); ++i)
    if (states_match(*a.pred[i], *a.gold[i])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(a.pred.size());
}

double slot_accuracy(const PredictionSet& preds, const PredictionSet& golds,
                     const std::vector<std::string>& slots) {
  if (slots.empty()) throw ValidationError("slot accuracy needs a non-empty slot inventory");
  const Aligned a = align(preds, golds);
  const auto n = static_cast<std::ptrdiff_t>(a.pred.size());
  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    hits += static_cast<long long>(slot_hits(*a.pred[i], *a.gold[i], slots));
  return static_cast<double>(hits) / (static_cast<double>(n) * static_cast<double>(slots.size()));
}

double slot_accuracy_serial(const PredictionSet& preds, const PredictionSet& golds,
                            const std::vector<std::string>& slots) {
  if (slots.empty()) throw ValidationError("slot accuracy needs a non-empty slot inventory");
  const Aligned a = align(preds, golds);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.pred.size(); ++i) hits += slot_hits(*a.pred[i], *a.gold[i], slots);
  return static_cast<double>(hits) /
         (static_cast<double>(a.pred.size()) * static_cast<double>(slots.size()));
}

std::map<std::string, double> per_slot_accuracy(const PredictionSet& preds,
                                                const PredictionSet& golds,
                                                const std::vector<std::string>& slots) {
  const Aligned a = align(preds, golds);
  std::vector<std::size_t> hits(slots.size(), 0);
  for (std::size_t i = 0; i < a.pred.size(); ++i) {
    const DialogueState np = normalize_state(*a.pred[i]);
    const DialogueState ng = normalize_state(*a.gold[i]);
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (value_or_empty(np, slots[k]) == value_or_empty(ng, slots[k])) ++hits[k];
  }
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < slots.size(); ++k)
    out[slots[k]] = static_cast<double>(hits[k]) / static_cast<double>(a.pred.size());
  return out;
}

EvalReport evaluate(const PredictionSet& preds, const PredictionSet& golds, const Schema& schema,
                    const std::map<std::string, std::vector<std::string>>* tags) {
  std::vector<std::string> slots;
  for (const SlotDef* s : schema.informable_slots()) slots.push_back(s->name);
  EvalReport r;
  r.joint_goal_accuracy = joint_goal_accuracy(preds, golds);
  r.slot_accuracy = slot_accuracy(preds, golds, slots);
  r.per_slot_accuracy = per_slot_accuracy(preds, golds, slots);
  r.turns = golds.size();
  r.slots = slots.size();
  std::set<std::string> ids;
  for (const auto& [k, s] : golds.turns) ids.insert(k.first);
  r.dialogues = ids.size();

  for (const auto& domain : schema.domain_names()) {
    std::set<std::string> dslots;
    for (const SlotDef* s : schema.informable_slots(domain)) dslots.insert(s->name);
    if (dslots.empty()) continue;
    std::set<std::string> members;
    for (const auto& id : ids) {
      if (tags) {
        auto it = tags->find(id);
        if (it != tags->end() && std::find(it->second.begin(), it->second.end(), domain) != it->second.end())
          members.insert(id);
      }
    }
    if (!tags) {
      for (const auto& [k, s] : golds.turns)
        if (!restrict_to(normalize_state(s), dslots).empty()) members.insert(k.first);
    }
    if (members.empty()) continue;
    PredictionSet dp;
    PredictionSet dg;
    for (const auto& [k, s] : golds.turns)
      if (members.count(k.first)) dg.turns.emplace(k, restrict_to(s, dslots));
    for (const auto& [k, s] : preds.turns)
      if (members.count(k.first)) dp.turns.emplace(k, restrict_to(s, dslots));
    DomainScore ds;
    ds.joint_goal_accuracy = joint_goal_accuracy(dp, dg);
    ds.slot_accuracy = slot_accuracy(dp, dg, std::vector<std::string>(dslots.begin(), dslots.end()));
    ds.turns = dg.size();
    ds.dialogues = members.size();
    r.per_domain[domain] = ds;
  }
  return r;
}

std::string report_to_json(const EvalReport& report, const std::optional<double>& coverage) {
  ojson j;
  j["joint_goal_accuracy"] = report.joint_goal_accuracy;
  j["slot_accuracy"] = report.slot_accuracy;
  j["dialogues"] = report.dialogues;
  j["turns"] = report.turns;
  j["slots"] = report.slots;
  ojson dom = ojson::object();
  for (const auto& [d, s] : report.per_domain)
    dom[d] = {{"joint_goal_accuracy", s.joint_goal_accuracy},
              {"slot_accuracy", s.slot_accuracy},
              {"dialogues", s.dialogues},
              {"turns", s.turns}};
  j["per_domain"] = std::move(dom);
  ojson ps = ojson::object();
  for (const auto& [s, a] : report.per_slot_accuracy) ps[s] = a;
  j["per_slot_accuracy"] = std::move(ps);
  if (coverage) j["zero_shot_coverage"] = *coverage;
  return j.dump(2) + "\n";
}

std::string report_to_text(const EvalReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %8s\n", "scope", "JGA(%)", "SA(%)",
                "dialogues", "turns");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f %10zu %8zu\n", "all",
                100.0 * report.joint_goal_accuracy, 100.0 * report.slot_accuracy, report.dialogues,
                report.turns);
  out += buf;
  for (const auto& [d, s] : report.per_domain) {
    std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f %10zu %8zu\n", d.c_str(),
                  100.0 * s.joint_goal_accuracy, 100.0 * s.slot_accuracy, s.dialogues, s.turns);
    out += buf;
  }
  return out;
}

std::string per_slot_csv(const EvalReport& report) {
  std::string out = "slot,accuracy\n";
  char buf[64];
  for (const auto& [s, a] : report.per_slot_accuracy) {
    std::snprintf(buf, sizeof buf, "%.6f", a);
    // Slot names never contain commas or quotes.
    out += s + "," + buf + "\n";
  }
  return out;
}

double zero_shot_coverage(double zero_acc, double full_acc) {
  if (!(full_acc > 0.0))
    throw ValidationError("zero-shot coverage is undefined when the full-data accuracy is " +
                          std::to_string(full_acc));
  return zero_acc / full_acc;
}

IntrinsicReport labeler_intrinsic_eval(const Corpus& gold, const Schema& schema,
                                       const LabelerBackend& backend, const LabelerConfig& config) {
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  std::vector<std::vector<TurnAnnotation>> predicted(gold.size());
  std::vector<std::exception_ptr> errors(gold.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& d = gold[static_cast<std::size_t>(i)];
      predicted[static_cast<std::size_t>(i)] =
          annotate_dialogue(d.dialogue, candidates_from_states(d.annotations), schema, backend, config)
              .turns;
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  PredictionSet preds;
  PredictionSet golds;
  std::map<std::string, std::vector<std::string>> tags;
  std::size_t domain_hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& d = gold[i];
    tags[d.id] = d.domains;
    for (std::size_t t = 0; t < d.annotations.size(); ++t) {
      golds.add(d.id, t + 1, d.annotations[t].state);
      preds.add(d.id, t + 1, predicted[i][t].state);
      if (predicted[i][t].active_domain == d.annotations[t].active_domain) ++domain_hits;
    }
  }
  IntrinsicReport r;
  if (golds.size() == 0) return r;
  EvalReport full = evaluate(preds, golds, schema, &tags);
  r.joint_goal_accuracy = full.joint_goal_accuracy;
  r.per_domain = full.per_domain;
  r.turns = golds.size();
  r.domain_accuracy = static_cast<double>(domain_hits) / static_cast<double>(golds.size());
  return r;
}

namespace {

std::size_t dialogue_tokens(const AnnotatedDialogue& d) {
  std::size_t n = 0;
  for (const auto& t : d.dialogue.turns) n += count_tokens(t.system) + count_tokens(t.user);
  return n;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  unsigned long long turns = 0;
  unsigned long long tokens = 0;
#pragma omp parallel for reduction(+ : turns, tokens) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& d = corpus[static_cast<std::size_t>(i)];
    turns += d.dialogue.turns.size();
    tokens += dialogue_tokens(d);
  }
  return {corpus.size(), static_cast<std::size_t>(turns), static_cast<std::size_t>(tokens)};
}

CorpusStats corpus_stats_serial(const Corpus& corpus) {
  CorpusStats s;
  s.dialogues = corpus.size();
  for (const auto& d : corpus) {
    s.turns += d.dialogue.turns.size();
    s.tokens += dialogue_tokens(d);
  }
  return s;
}

std::optional<double> perplexity(const std::vector<std::vector<double>>& token_logprobs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& seq : token_logprobs) {
    for (double lp : seq) sum += lp;
    n += seq.size();
  }
  if (n == 0) return std::nullopt;
  return std::exp(-sum / static_cast<double>(n));
}

}  // namespace wozsynth
