// multiwoz.cpp
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

#include "wozsynth/multiwoz.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

namespace {

std::string strip_json_suffix(std::string id) {
  if (id.size() > 5 && id.compare(id.size() - 5, 5, ".json") == 0) id.resize(id.size() - 5);
  return id;
}

bool contains_word(const std::string& hay, const std::string& needle) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right = end >= hay.size() || !is_word_char(hay[end]);
    if (left && right) return true;
  }
  return false;
}

std::string scalar(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return {};
}

// Goal section fields in the order they are read.
constexpr const char* kGoalSections[] = {"info", "fail_info", "book", "fail_book"};

bool goal_domain_active(const ojson& g) {
  if (!g.is_object() || g.empty()) return false;
  for (const char* sec : kGoalSections)
    if (g.contains(sec) && g[sec].is_object() && !g[sec].empty()) return true;
  return g.contains("reqt") && !g["reqt"].empty();
}

std::vector<std::string> tagged_domains(const ojson& goal) {
  std::vector<std::string> out;
  if (!goal.is_object()) return out;
  for (auto it = goal.begin(); it != goal.end(); ++it) {
    if (it.key() == "message" || it.key() == "topic") continue;
    if (goal_domain_active(*it)) out.push_back(it.key());
  }
  return out;
}

std::optional<std::string> goal_slot(const Schema& schema, const std::string& domain,
                                     const std::string& section, const std::string& key) {
  if (section == "book" || section == "fail_book")
    return multiwoz_slot_name(schema, domain, "book " + key);
  return multiwoz_slot_name(schema, domain, key);
}

struct Builder {
  const Schema& schema;
  const KnowledgeBase& kb;
  std::set<std::string> val;
  std::set<std::string> test;
  IngestResult result;

  GoalInstruction build_goal(const std::string& id, const ojson& goal,
                             const std::vector<std::string>& tags) {
    GoalInstruction g;
    std::vector<std::string> messages;
    if (goal.contains("message")) {
      if (goal["message"].is_string()) messages.push_back(goal["message"].get<std::string>());
      else
        for (const auto& m : goal["message"])
          if (m.is_string()) messages.push_back(m.get<std::string>());
    }
    g.text = goal_text_from_messages(messages);
    g.template_id = "multiwoz:" + id;
    for (const auto& d : tags)
      if (schema.has_domain(d)) g.domains.push_back(d);
    for (const auto& d : g.domains) {
      const ojson& dg = goal[d];
      for (const char* sec : kGoalSections) {
        if (!dg.contains(sec) || !dg[sec].is_object()) continue;
        for (auto it = dg[sec].begin(); it != dg[sec].end(); ++it) {
          auto slot = goal_slot(schema, d, sec, it.key());
          if (!slot) continue;
          const SlotDef* def = schema.find_slot(*slot);
          if (!def->informable()) continue;
          std::string value = canonical_value(*def, scalar(*it));
          if (value.empty()) continue;
          if (contains_word(g.text, value)) {
            if (g.explicit_pairs.insert({*slot, value})) ++result.stats.goal_pairs_kept;
          } else {
            ++result.stats.goal_pairs_dropped;
          }
        }
      }
    }
    return g;
  }

  APICallResultSet gold_api(const GoalInstruction& g) {
    APICallResultSet api;
    for (const auto& d : g.domains) {
      if (api.size() >= kMaxApiResults) break;
      if (!kb.has_domain(d)) continue;
      std::vector<SlotValue> constraints;
      for (const auto& [slot, value] : g.explicit_pairs)
        if (slot_domain(slot) == d && kb.domain_has_slot(d, slot)) constraints.emplace_back(slot, value);
      auto hits = query_kb(kb, d, constraints);
      if (hits.empty()) continue;
      api.results.push_back(hits.front());
      api.serves.push_back(d);
    }
    return api;
  }

  DialogueState read_state(const std::string& id, const ojson& metadata) {
    DialogueState state;
    if (!metadata.is_object()) return state;
    for (auto dit = metadata.begin(); dit != metadata.end(); ++dit) {
      const std::string domain = dit.key();
      const bool known = schema.has_domain(domain);
      for (const char* part : {"semi", "book"}) {
        if (!dit->contains(part) || !(*dit)[part].is_object()) continue;
        for (auto it = (*dit)[part].begin(); it != (*dit)[part].end(); ++it) {
          if (it.key() == "booked" || !it->is_string()) continue;
          const std::string raw = it->get<std::string>();
          const std::string probe = normalize_value(raw);
          if (probe.empty() || probe == "not mentioned") continue;
          if (!known) {
            ++result.stats.ignored_state_values;
            continue;
          }
          const std::string key = std::string(part) == "book" ? "book " + it.key() : it.key();
          auto slot = multiwoz_slot_name(schema, domain, key);
          const SlotDef* def = slot ? schema.find_slot(*slot) : nullptr;
          if (def == nullptr || !def->informable())
            throw ValidationError("dialogue " + id + ": state value for unknown slot '" + domain +
                                  "-" + normalize_value(key) + "'");
          std::string value = normalize_state_value(*def, raw);
          if (!value.empty()) state[*slot] = value;
        }
      }
    }
    return state;
  }

  std::vector<std::string> act_domains(const ojson& entry) {
    std::vector<std::string> out;
    if (!entry.contains("dialog_act") || !entry["dialog_act"].is_object()) return out;
    for (auto it = entry["dialog_act"].begin(); it != entry["dialog_act"].end(); ++it) {
      std::string d = to_lower(it.key().substr(0, it.key().find('-')));
      if (schema.has_domain(d) && std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
    }
    return out;
  }

  std::string pick_active(const DialogueState& prev, const DialogueState& cur,
                          const std::vector<std::string>& acts, const std::string& last,
                          const std::vector<std::string>& tags) {
    std::vector<std::string> changed;
    for (const SlotDef* s : schema.informable_slots()) {
      auto a = prev.find(s->name);
      auto b = cur.find(s->name);
      const bool differs = (a == prev.end()) != (b == cur.end()) ||
                           (a != prev.end() && b != cur.end() && a->second != b->second);
      if (differs && std::find(changed.begin(), changed.end(), s->domain) == changed.end())
        changed.push_back(s->domain);
    }
    for (const auto& d : acts)
      if (std::find(changed.begin(), changed.end(), d) != changed.end()) return d;
    if (!changed.empty()) return changed.front();
    if (!acts.empty()) return acts.front();
    if (!last.empty()) return last;
    for (const auto& d : tags)
      if (schema.has_domain(d)) return d;
    return {};
  }

  void add_dialogue(const std::string& id, const ojson& entry) {
    const std::string sid = strip_json_suffix(id);
    const std::string split = val.count(sid) ? "val" : test.count(sid) ? "test" : "train";
    const ojson goal = entry.value("goal", ojson::object());
    AnnotatedDialogue d;
    d.id = id;
    d.domains = tagged_domains(goal);
    d.provenance.source = "multiwoz";
    d.provenance.split = split;

    if (!entry.contains("log") || !entry["log"].is_array())
      throw ParseError("dialogue " + id + ": missing log");
    const ojson& log = entry["log"];
    DialogueState prev;
    std::string last;
    for (std::size_t u = 0; u < log.size(); u += 2) {
      Turn turn;
      turn.system = u == 0 ? std::string() : normalize_value(log[u - 1].value("text", std::string()));
      turn.user = normalize_value(log[u].value("text", std::string()));
      DialogueState state = prev;
      if (u + 1 < log.size()) state = read_state(id, log[u + 1].value("metadata", ojson::object()));
      last = pick_active(prev, state, act_domains(log[u]), last, d.domains);
      d.dialogue.turns.push_back(std::move(turn));
      d.annotations.push_back({state, last.empty() ? std::string() : capitalize(last)});
      prev = std::move(state);
    }
    GoalInstruction g = build_goal(id, goal, d.domains);
    d.api = gold_api(g);
    d.candidates = build_candidates(g, d.api, schema);
    d.goal = g;
    d.provenance.template_id = g.template_id;

    ++result.stats.dialogues_per_split[split];
    for (const auto& t : d.domains) ++result.stats.domain_dialogues[split][t];
    result.stats.turns += d.dialogue.turns.size();
    result.goals.push_back(std::move(g));
    result.corpus.push_back(std::move(d));
  }
};

ojson parse_data(const std::string& text, const std::string& where) {
  try {
    ojson j = ojson::parse(text);
    if (!j.is_object()) throw ParseError(where + ": expected an object keyed by dialogue id");
    return j;
  } catch (const ojson::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
}

IngestResult ingest_parsed(const ojson& data, const Schema& schema, const KnowledgeBase& kb,
                           const std::vector<std::string>& val_ids,
                           const std::vector<std::string>& test_ids) {
  Builder b{schema, kb, {}, {}, {}};
  for (const auto& id : val_ids) b.val.insert(strip_json_suffix(collapse_whitespace(id)));
  for (const auto& id : test_ids) b.test.insert(strip_json_suffix(collapse_whitespace(id)));
  b.result.schema = schema;
  b.result.kb = kb;
  for (auto it = data.begin(); it != data.end(); ++it) {
    try {
      b.add_dialogue(it.key(), *it);
    } catch (const ojson::exception& e) {
      throw ParseError("dialogue " + it.key() + ": " + e.what());
    }
  }
  return std::move(b.result);
}

std::vector<std::string> read_split_list(const std::filesystem::path& dir, const std::string& stem) {
  for (const char* ext : {".txt", ".json"}) {
    auto p = dir / (stem + ext);
    if (!std::filesystem::exists(p)) continue;
    if (std::string(ext) == ".json") {
      ojson j = parse_data("{\"ids\":" + read_file(p.string()) + "}", p.string());
      return j["ids"].get<std::vector<std::string>>();
    }
    std::vector<std::string> out;
    for (auto& line : read_lines(p.string())) {
      line = collapse_whitespace(line);
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }
  return {};
}

}  // namespace

std::string goal_text_from_messages(const std::vector<std::string>& messages) {
  std::string joined;
  for (const auto& m : messages) {
    bool in_tag = false;
    for (char c : m) {
      if (c == '<') in_tag = true;
      else if (c == '>' && in_tag) in_tag = false;
      else if (!in_tag) joined.push_back(c);
    }
    joined.push_back(' ');
  }
  return normalize_value(joined);
}

std::string normalize_state_value(const SlotDef& slot, const std::string& raw) {
  const std::string v = normalize_value(raw);
  if (v.empty() || v == "not mentioned" || v == "none") return {};
  if (v == "dontcare" || v == "dont care" || v == "don't care" || v == "do n't care" ||
      v == "do nt care" || v == "any")
    return kDontcare;
  return canonical_value(slot, v);
}

IngestResult ingest_multiwoz_data(const std::string& data_json, const Schema& schema,
                                  const KnowledgeBase& kb, const std::vector<std::string>& val_ids,
                                  const std::vector<std::string>& test_ids) {
  return ingest_parsed(parse_data(data_json, "data.json"), schema, kb, val_ids, test_ids);
}

IngestResult ingest_multiwoz(const std::string& dir, const Schema& schema) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw ConfigError("MultiWOZ input is not a directory: " + dir);
  const fs::path data_path = root / "data.json";
  if (!fs::exists(data_path)) throw ConfigError("no data.json in " + dir);
  ojson data = parse_data(read_file(data_path.string()), data_path.string());

  std::vector<std::string> referenced;
  for (auto it = data.begin(); it != data.end(); ++it) {
    if (!it->is_object() || !it->contains("goal")) continue;
    for (const auto& d : tagged_domains((*it)["goal"]))
      if (schema.has_domain(d) && std::find(referenced.begin(), referenced.end(), d) == referenced.end())
        referenced.push_back(d);
  }
  KnowledgeBase kb = load_multiwoz_db_dir(schema, dir, referenced);
  return ingest_parsed(data, schema, kb, read_split_list(root, "valListFile"),
                       read_split_list(root, "testListFile"));
}

}  // namespace wozsynth
