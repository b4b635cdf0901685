// corpus_io.cpp
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

#include "wozsynth/corpus_io.hpp"

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

namespace {

ojson pairs_json(const std::vector<SlotValue>& pairs) {
  ojson a = ojson::array();
  for (const auto& [s, v] : pairs) a.push_back({s, v});
  return a;
}

ojson state_json(const DialogueState& state) {
  ojson o = ojson::object();
  for (const auto& [s, v] : state) o[s] = v;
  return o;
}

ojson dialogue_json(const AnnotatedDialogue& d) {
  ojson o;
  o["id"] = d.id;
  o["domains"] = d.domains;
  ojson turns = ojson::array();
  for (std::size_t t = 0; t < d.dialogue.turns.size(); ++t) {
    ojson turn;
    turn["system"] = d.dialogue.turns[t].system;
    turn["user"] = d.dialogue.turns[t].user;
    if (t < d.annotations.size()) {
      turn["state"] = state_json(d.annotations[t].state);
      turn["active_domain"] = d.annotations[t].active_domain;
    }
    turns.push_back(std::move(turn));
  }
  o["turns"] = std::move(turns);
  o["raw_text"] = d.dialogue.raw_text;
  if (d.goal) {
    ojson g;
    g["text"] = d.goal->text;
    g["template_id"] = d.goal->template_id;
    g["domains"] = d.goal->domains;
    g["explicit_pairs"] = pairs_json(d.goal->explicit_pairs.items());
    o["goal"] = std::move(g);
  } else {
    o["goal"] = nullptr;
  }
  ojson api = ojson::array();
  for (std::size_t i = 0; i < d.api.results.size(); ++i) {
    ojson r;
    r["domain"] = d.api.results[i].domain;
    r["serves"] = i < d.api.serves.size() ? d.api.serves[i] : d.api.results[i].domain;
    r["pairs"] = pairs_json(d.api.results[i].pairs);
    api.push_back(std::move(r));
  }
  o["api"] = std::move(api);
  o["candidates"] = {{"from_goal", pairs_json(d.candidates.from_goal.items())},
                     {"from_api", pairs_json(d.candidates.from_api.items())}};
  const Provenance& p = d.provenance;
  o["provenance"] = {{"source", p.source},     {"template_id", p.template_id},
                     {"seed", p.seed},         {"generation_seed", p.generation_seed},
                     {"top_p", p.top_p},
                     {"temperature", p.temperature}, {"max_tokens", p.max_tokens},
                     {"attempts", p.attempts}, {"split", p.split}};
  return o;
}

std::vector<SlotValue> read_pairs(const ojson& a, const std::string& where) {
  if (!a.is_array()) throw ParseError(where + ": expected an array of [slot, value] pairs");
  std::vector<SlotValue> out;
  for (const auto& p : a) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ParseError(where + ": expected [slot, value] string pairs");
    out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return out;
}

PairSet to_pairset(const std::vector<SlotValue>& v) {
  PairSet s;
  for (const auto& p : v) s.insert(p);
  return s;
}

template <class T>
T get_or(const ojson& o, const char* key, T fallback) {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return fallback;
  return it->get<T>();
}

AnnotatedDialogue read_dialogue(const ojson& o, std::size_t index, const Schema* schema) {
  const std::string where = "dialogue #" + std::to_string(index);
  if (!o.is_object()) throw ParseError(where + ": not an object");
  AnnotatedDialogue d;
  d.id = get_or<std::string>(o, "id", "");
  if (d.id.empty()) throw ParseError(where + ": missing id");
  const std::string at = "dialogue '" + d.id + "'";
  d.domains = get_or<std::vector<std::string>>(o, "domains", {});
  if (!o.contains("turns") || !o["turns"].is_array()) throw ParseError(at + ": missing turns");
  bool annotated = true;
  for (const auto& t : o["turns"]) {
    d.dialogue.turns.push_back({get_or<std::string>(t, "system", ""), get_or<std::string>(t, "user", "")});
    if (!t.contains("state")) {
      annotated = false;
      continue;
    }
    TurnAnnotation ann;
    for (auto it = t["state"].begin(); it != t["state"].end(); ++it) {
      if (!it.value().is_string()) throw ParseError(at + ": non-string state value for " + it.key());
      if (schema) {
        const SlotDef* s = schema->find_slot(it.key());
        if (s == nullptr || !s->informable())
          throw ValidationError(at + ": state uses unknown slot '" + it.key() + "'");
      }
      ann.state[it.key()] = it.value().get<std::string>();
    }
    ann.active_domain = get_or<std::string>(t, "active_domain", "");
    d.annotations.push_back(std::move(ann));
  }
  if (!annotated && !d.annotations.empty())
    throw ParseError(at + ": some turns carry a state and some do not");
  d.dialogue.raw_text = get_or<std::string>(o, "raw_text", "");
  if (o.contains("goal") && !o["goal"].is_null()) {
    const auto& g = o["goal"];
    GoalInstruction goal;
    goal.text = get_or<std::string>(g, "text", "");
    goal.template_id = get_or<std::string>(g, "template_id", "");
    goal.domains = get_or<std::vector<std::string>>(g, "domains", {});
    goal.explicit_pairs = to_pairset(read_pairs(g.value("explicit_pairs", ojson::array()), at + " goal"));
    d.goal = std::move(goal);
  }
  for (const auto& r : o.value("api", ojson::array())) {
    KBInstance inst;
    inst.domain = get_or<std::string>(r, "domain", "");
    inst.pairs = read_pairs(r.value("pairs", ojson::array()), at + " api");
    d.api.serves.push_back(get_or<std::string>(r, "serves", inst.domain));
    d.api.results.push_back(std::move(inst));
  }
  if (o.contains("candidates")) {
    const auto& c = o["candidates"];
    d.candidates.from_goal = to_pairset(read_pairs(c.value("from_goal", ojson::array()), at + " candidates"));
    d.candidates.from_api = to_pairset(read_pairs(c.value("from_api", ojson::array()), at + " candidates"));
  }
  if (o.contains("provenance")) {
    const auto& p = o["provenance"];
    d.provenance.source = get_or<std::string>(p, "source", "");
    d.provenance.template_id = get_or<std::string>(p, "template_id", "");
    d.provenance.seed = get_or<std::uint64_t>(p, "seed", 0);
    d.provenance.generation_seed = get_or<std::uint64_t>(p, "generation_seed", 0);
    d.provenance.top_p = get_or<double>(p, "top_p", 0.0);
    d.provenance.temperature = get_or<double>(p, "temperature", 0.0);
    d.provenance.max_tokens = get_or<int>(p, "max_tokens", 0);
    d.provenance.attempts = get_or<int>(p, "attempts", 0);
    d.provenance.split = get_or<std::string>(p, "split", "");
  }
  return d;
}

std::string trade_value(const std::string& v) { return is_dontcare(v) ? "dontcare" : v; }

}  // namespace

std::string corpus_to_json(const Corpus& corpus) {
  ojson doc;
  doc["format"] = kCorpusFormat;
  doc["version"] = kCorpusVersion;
  ojson ds = ojson::array();
  for (const auto& d : corpus) ds.push_back(dialogue_json(d));
  doc["dialogues"] = std::move(ds);
  return doc.dump(1) + "\n";
}

Corpus parse_corpus_json(const std::string& text, const Schema* schema) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("corpus: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kCorpusFormat)
    throw ParseError("corpus: missing or wrong 'format' field");
  if (doc.value("version", 0) != kCorpusVersion)
    throw ParseError("corpus: unsupported version " + doc.value("version", ojson()).dump());
  if (!doc.contains("dialogues") || !doc["dialogues"].is_array())
    throw ParseError("corpus: missing 'dialogues' array");
  Corpus out;
  std::size_t i = 0;
  try {
    for (const auto& d : doc["dialogues"]) out.push_back(read_dialogue(d, i++, schema));
  } catch (const ojson::exception& e) {
    throw ParseError("corpus: dialogue #" + std::to_string(i - 1) + ": " + e.what());
  }
  return out;
}

Corpus load_corpus(const std::string& path, const Schema* schema) {
  try {
    return parse_corpus_json(read_file(path), schema);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  write_file(path, corpus_to_json(corpus));
}

std::string corpus_to_turn_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& d : corpus) {
    for (std::size_t t = 0; t < d.dialogue.turns.size(); ++t) {
      ojson line;
      line["dialogue_id"] = d.id;
      line["turn_idx"] = t + 1;
      line["system"] = d.dialogue.turns[t].system;
      line["user"] = d.dialogue.turns[t].user;
      line["belief_state"] =
          t < d.annotations.size() ? state_json(d.annotations[t].state) : ojson::object();
      line["active_domain"] = t < d.annotations.size() ? d.annotations[t].active_domain : "";
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::string corpus_to_trade_json(const Corpus& corpus) {
  ojson dials = ojson::array();
  for (const auto& d : corpus) {
    ojson dial;
    dial["dialogue_idx"] = d.id;
    dial["domains"] = d.domains;
    ojson turns = ojson::array();
    DialogueState prev;
    for (std::size_t t = 0; t < d.dialogue.turns.size(); ++t) {
      const DialogueState state = t < d.annotations.size() ? d.annotations[t].state : DialogueState{};
      ojson belief = ojson::array();
      ojson label = ojson::array();
      for (const auto& [s, v] : state) {
        belief.push_back({{"slots", ojson::array({ojson::array({s, trade_value(v)})})}, {"act", "inform"}});
        auto it = prev.find(s);
        if (it == prev.end() || it->second != v) label.push_back({s, trade_value(v)});
      }
      ojson turn;
      turn["turn_idx"] = t;
      turn["system_transcript"] = d.dialogue.turns[t].system;
      turn["transcript"] = d.dialogue.turns[t].user;
      turn["belief_state"] = std::move(belief);
      turn["turn_label"] = std::move(label);
      turn["domain"] = t < d.annotations.size() ? to_lower(d.annotations[t].active_domain) : "";
      turns.push_back(std::move(turn));
      prev = state;
    }
    dial["dialogue"] = std::move(turns);
    dials.push_back(std::move(dial));
  }
  return dials.dump(1) + "\n";
}

}  // namespace wozsynth
