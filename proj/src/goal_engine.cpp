// goal_engine.cpp
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

#include "wozsynth/goal_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

namespace {

Placeholder make_placeholder(const std::string& key) {
  Placeholder p{key, key, 1};
  auto hash = key.rfind('#');
  if (hash != std::string::npos && hash + 1 < key.size()) {
    const std::string digits = key.substr(hash + 1);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      int k = std::stoi(digits);
      if (k >= 2) {
        p.slot = key.substr(0, hash);
        p.index = k;
      }
    }
  }
  return p;
}

bool boundary_before(const std::string& text, std::size_t pos, const std::string& value) {
  if (pos == 0 || !is_word_char(value.front())) return true;
  return !is_word_char(text[pos - 1]);
}

bool boundary_after(const std::string& text, std::size_t end, const std::string& value) {
  if (end >= text.size() || !is_word_char(value.back())) return true;
  return !is_word_char(text[end]);
}

// Position of the first whole-word occurrence of `word`, or npos.
std::size_t find_word(const std::string& text, const std::string& word) {
  if (word.empty()) return std::string::npos;
  for (std::size_t pos = text.find(word); pos != std::string::npos;
       pos = text.find(word, pos + 1)) {
    if (boundary_before(text, pos, word) && boundary_after(text, pos + word.size(), word))
      return pos;
  }
  return std::string::npos;
}

bool is_default_booking_suffix(const std::string& suffix) {
  static const std::set<std::string> kBooking = {"book people", "book day", "book time",
                                                 "book stay",   "leaveat",  "arriveby"};
  return kBooking.count(suffix) > 0;
}

}  // namespace

std::vector<TemplatePiece> parse_template_text(const std::string& text) {
  std::vector<TemplatePiece> pieces;
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) {
      pieces.push_back(TemplatePiece{false, literal, {}});
      literal.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') {
      literal.push_back(text[i]);
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '[') {
      literal.push_back('[');
      ++i;
      continue;
    }
    auto close = text.find(']', i + 1);
    if (close == std::string::npos)
      throw ParseError("template text: unterminated placeholder at offset " + std::to_string(i));
    std::string key = text.substr(i + 1, close - i - 1);
    if (key.empty())
      throw ParseError("template text: empty placeholder at offset " + std::to_string(i));
    flush();
    pieces.push_back(TemplatePiece{true, {}, make_placeholder(key)});
    i = close;
  }
  flush();
  return pieces;
}

std::vector<Placeholder> template_placeholders(const std::string& text) {
  std::vector<Placeholder> out;
  std::set<std::string> seen;
  for (const auto& piece : parse_template_text(text))
    if (piece.is_placeholder && seen.insert(piece.placeholder.key).second)
      out.push_back(piece.placeholder);
  return out;
}

GoalTemplate delexicalize(const GoalInstruction& instruction) {
  const std::string& text = instruction.text;
  struct Entry {
    std::string key;
    std::string slot;
    std::string value;
    bool matched = false;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> per_slot;
  for (const auto& [slot, value] : instruction.explicit_pairs) {
    if (value.empty())
      throw ValidationError("delexicalize: empty value for slot '" + slot + "'");
    int k = ++per_slot[slot];
    entries.push_back({k == 1 ? slot : slot + "#" + std::to_string(k), slot, value});
  }
  // Entries sharing an identical value take occurrences round-robin.
  std::map<std::string, std::vector<std::size_t>> by_value;
  for (std::size_t e = 0; e < entries.size(); ++e) by_value[entries[e].value].push_back(e);
  std::map<std::string, std::size_t> next_in_group;

  std::string out;
  out.reserve(text.size() + 16);
  std::size_t i = 0;
  while (i < text.size()) {
    const std::string* best = nullptr;
    for (const auto& [value, group] : by_value) {
      if (value.size() > text.size() - i) continue;
      if (best && value.size() <= best->size()) continue;
      if (text.compare(i, value.size(), value) != 0) continue;
      if (!boundary_before(text, i, value) || !boundary_after(text, i + value.size(), value))
        continue;
      best = &value;
    }
    if (best) {
      const auto& group = by_value[*best];
      std::size_t& cursor = next_in_group[*best];
      Entry& entry = entries[group[cursor % group.size()]];
      ++cursor;
      entry.matched = true;
      out += "[" + entry.key + "]";
      i += best->size();
      continue;
    }
    if (text[i] == '[') out += "[[";
    else out.push_back(text[i]);
    ++i;
  }
  for (const auto& [value, group] : by_value) {
    bool any = std::any_of(group.begin(), group.end(), [&](std::size_t e) { return entries[e].matched; });
    if (!any)
      throw ValidationError("delexicalize: value '" + value + "' of slot '" +
                            entries[group.front()].slot + "' not found in goal text");
  }

  GoalTemplate tmpl;
  tmpl.id = instruction.template_id;
  tmpl.text = std::move(out);
  std::set<std::string> seen;
  for (const auto& ph : template_placeholders(tmpl.text)) {
    if (seen.insert(ph.slot).second) tmpl.placeholder_slots.push_back(ph.slot);
    if (is_default_booking_suffix(slot_suffix(ph.slot)) &&
        std::find(tmpl.booking_slots.begin(), tmpl.booking_slots.end(), ph.slot) ==
            tmpl.booking_slots.end())
      tmpl.booking_slots.push_back(ph.slot);
  }

  // Domains ordered by first mention: a placeholder of the domain in the
  // template, or the domain name itself in the instruction text.
  std::vector<std::string> domains = instruction.domains;
  for (const auto& slot : tmpl.placeholder_slots) {
    std::string d = slot_domain(slot);
    if (std::find(domains.begin(), domains.end(), d) == domains.end()) domains.push_back(d);
  }
  const std::string lowered = to_lower(tmpl.text);
  auto mention = [&](const std::string& d) {
    return std::min(find_word(lowered, d), tmpl.text.find("[" + d + "-"));
  };
  std::stable_sort(domains.begin(), domains.end(),
                   [&](const std::string& a, const std::string& b) { return mention(a) < mention(b); });
  tmpl.domains = std::move(domains);
  tmpl.shared_constraints = extract_shared_constraints(instruction);
  return tmpl;
}

std::string render_template(const std::string& template_text,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& piece : parse_template_text(template_text)) {
    if (!piece.is_placeholder) {
      out += piece.literal;
      continue;
    }
    auto it = values.find(piece.placeholder.key);
    if (it == values.end())
      throw ValidationError("render_template: no value for placeholder '" +
                            piece.placeholder.key + "'");
    out += it->second;
  }
  return out;
}

BookingPools BookingPools::defaults() {
  BookingPools pools;
  std::vector<std::string> people;
  for (int n = 1; n <= 8; ++n) people.push_back(std::to_string(n));
  std::vector<std::string> stay;
  for (int n = 1; n <= 7; ++n) stay.push_back(std::to_string(n));
  const std::vector<std::string> days = {"monday", "tuesday",  "wednesday", "thursday",
                                         "friday", "saturday", "sunday"};
  std::vector<std::string> times;
  for (int h = 0; h < 24; ++h) {
    for (int m = 0; m < 60; m += 5) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%02d:%02d", h, m);
      times.emplace_back(buf);
    }
  }
  pools.by_suffix["book people"] = people;
  pools.by_suffix["book stay"] = stay;
  pools.by_suffix["book day"] = days;
  pools.by_suffix["day"] = days;
  pools.by_suffix["book time"] = times;
  pools.by_suffix["leaveat"] = times;
  pools.by_suffix["arriveby"] = times;
  return pools;
}

const std::vector<std::string>* BookingPools::find(const std::string& slot) const {
  auto it = by_suffix.find(slot_suffix(slot));
  if (it == by_suffix.end() || it->second.empty()) return nullptr;
  return &it->second;
}

BookingPools parse_booking_pools(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("booking pools: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("booking pools: expected an object");
  BookingPools pools;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_array()) throw ParseError("booking pools: field '" + it.key() + "' must be a list");
    for (const auto& v : *it) {
      if (!v.is_string())
        throw ParseError("booking pools: field '" + it.key() + "' must hold strings");
      pools.by_suffix[it.key()].push_back(v.get<std::string>());
    }
  }
  return pools;
}

namespace {

std::vector<std::string> sampled_domains(const GoalTemplate& tmpl) {
  std::vector<std::string> out;
  for (const auto& d : tmpl.domains) {
    if (out.size() == kMaxApiResults) break;
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  return out;
}

bool constraint_holds(const KBInstance& a, const std::string& slot_a, const KBInstance& b,
                      const std::string& slot_b) {
  const std::string* va = a.value_of(slot_a);
  const std::string* vb = b.value_of(slot_b);
  if (va == nullptr || vb == nullptr) return true;
  return normalize_value(*va) == normalize_value(*vb);
}

struct IndexedConstraint {
  std::size_t a;  // position in sampled domain list
  std::size_t b;
  const SharedConstraint* c;
};

std::vector<IndexedConstraint> index_constraints(const GoalTemplate& tmpl,
                                                 const std::vector<std::string>& domains) {
  std::vector<IndexedConstraint> out;
  auto pos = [&](const std::string& d) {
    return static_cast<std::size_t>(std::find(domains.begin(), domains.end(), d) - domains.begin());
  };
  for (const auto& c : tmpl.shared_constraints) {
    std::size_t a = pos(c.domain_a), b = pos(c.domain_b);
    if (a < domains.size() && b < domains.size()) out.push_back({a, b, &c});
  }
  return out;
}

}  // namespace

bool satisfies_constraints(const GoalTemplate& tmpl, const APICallResultSet& results) {
  for (const auto& c : tmpl.shared_constraints) {
    const KBInstance* a = nullptr;
    const KBInstance* b = nullptr;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (!a && results.serves[i] == c.domain_a) a = &results.results[i];
      if (!b && results.serves[i] == c.domain_b) b = &results.results[i];
    }
    if (a && b && !constraint_holds(*a, c.slot_a, *b, c.slot_b)) return false;
  }
  return true;
}

APICallResultSet sample_api_results(const GoalTemplate& tmpl, const KnowledgeBase& kb, Rng& rng,
                                    const SamplingOptions& options) {
  const auto domains = sampled_domains(tmpl);
  std::vector<const std::vector<KBInstance>*> pools;
  for (const auto& d : domains) {
    const auto& inst = kb.instances(d);
    if (inst.empty())
      throw ValidationError("template '" + tmpl.id + "': no KB instances for domain '" + d + "'");
    pools.push_back(&inst);
  }
  const auto constraints = index_constraints(tmpl, domains);
  auto ok = [&](const std::vector<std::size_t>& pick) {
    for (const auto& ic : constraints)
      if (!constraint_holds((*pools[ic.a])[pick[ic.a]], ic.c->slot_a, (*pools[ic.b])[pick[ic.b]],
                            ic.c->slot_b))
        return false;
    return true;
  };
  auto build = [&](const std::vector<std::size_t>& pick) {
    APICallResultSet out;
    for (std::size_t i = 0; i < domains.size(); ++i) {
      out.results.push_back((*pools[i])[pick[i]]);
      out.serves.push_back(domains[i]);
    }
    return out;
  };

  std::vector<std::size_t> pick(domains.size());
  const std::size_t tries = constraints.empty() ? 1 : options.max_rejections;
  for (std::size_t t = 0; t < tries; ++t) {
    for (std::size_t i = 0; i < domains.size(); ++i) pick[i] = rng.uniform_index(pools[i]->size());
    if (ok(pick)) return build(pick);
  }

  // Exhaustive fallback over the joint space, uniform among valid picks.
  double space = 1.0;
  for (const auto* p : pools) space *= static_cast<double>(p->size());
  if (space > static_cast<double>(options.exhaustive_limit))
    throw UnsatisfiableError("template '" + tmpl.id +
                             "': unsatisfiable constraints within the rejection budget");
  std::vector<std::vector<std::size_t>> valid;
  std::vector<std::size_t> cur(domains.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == domains.size()) {
      valid.push_back(cur);
      return;
    }
    for (std::size_t k = 0; k < pools[depth]->size(); ++k) {
      cur[depth] = k;
      bool prune = false;
      for (const auto& ic : constraints) {
        std::size_t hi = std::max(ic.a, ic.b);
        if (hi != depth) continue;
        if (!constraint_holds((*pools[ic.a])[cur[ic.a]], ic.c->slot_a, (*pools[ic.b])[cur[ic.b]],
                              ic.c->slot_b)) {
          prune = true;
          break;
        }
      }
      if (!prune) rec(depth + 1);
    }
  };
  rec(0);
  if (valid.empty())
    throw UnsatisfiableError("template '" + tmpl.id + "': unsatisfiable constraints");
  return build(valid[rng.uniform_index(valid.size())]);
}

GoalInstruction instantiate(const GoalTemplate& tmpl, const APICallResultSet& results,
                            const Schema& schema, Rng& rng, const BookingPools& pools) {
  auto serving = [&](const std::string& domain) -> const KBInstance* {
    for (std::size_t i = 0; i < results.size(); ++i)
      if (results.serves[i] == domain) return &results.results[i];
    return nullptr;
  };
  auto is_booking = [&](const std::string& slot) {
    return pools.find(slot) != nullptr ||
           std::find(tmpl.booking_slots.begin(), tmpl.booking_slots.end(), slot) !=
               tmpl.booking_slots.end();
  };
  auto from_instance = [&](const std::string& slot) -> const std::string* {
    const KBInstance* inst = serving(slot_domain(slot));
    if (inst) return inst->value_of(slot);
    return nullptr;
  };
  auto from_partner = [&](const std::string& slot) -> const std::string* {
    const std::string d = slot_domain(slot);
    for (const auto& c : tmpl.shared_constraints) {
      if (c.domain_b == d && c.slot_b == slot)
        if (const KBInstance* a = serving(c.domain_a))
          if (const std::string* v = a->value_of(c.slot_a)) return v;
      if (c.domain_a == d && c.slot_a == slot)
        if (const KBInstance* b = serving(c.domain_b))
          if (const std::string* v = b->value_of(c.slot_b)) return v;
    }
    return nullptr;
  };

  std::map<std::string, std::string> values;
  GoalInstruction out;
  for (const auto& ph : template_placeholders(tmpl.text)) {
    std::string value;
    const std::string* v = ph.index == 1 ? from_instance(ph.slot) : nullptr;
    if (!v && ph.index == 1) v = from_partner(ph.slot);
    if (v) {
      value = *v;
    } else if (is_booking(ph.slot)) {
      const auto* pool = pools.find(ph.slot);
      if (pool == nullptr)
        throw ValidationError("template '" + tmpl.id + "': no booking pool for slot '" + ph.slot +
                              "'");
      // Later values of the same slot must differ from the earlier ones.
      std::vector<std::string> choices;
      for (const auto& c : *pool) {
        bool used = false;
        for (const auto& [k, prev] : values)
          if (make_placeholder(k).slot == ph.slot && prev == c) used = true;
        if (!used) choices.push_back(c);
      }
      if (choices.empty()) choices = *pool;
      value = choices[rng.uniform_index(choices.size())];
    } else if (ph.index > 1) {
      auto first = values.find(ph.slot);
      if (first == values.end())
        throw ValidationError("template '" + tmpl.id + "': no source for slot '" + ph.key + "'");
      value = first->second;
    } else {
      throw ValidationError("template '" + tmpl.id + "': no source for slot '" + ph.slot + "'");
    }
    values[ph.key] = value;
    const SlotDef* def = schema.find_slot(ph.slot);
    if (def && def->informable()) out.explicit_pairs.insert({ph.slot, value});
  }
  out.text = render_template(tmpl.text, values);
  out.template_id = tmpl.id;
  out.domains = tmpl.domains;
  return out;
}

std::vector<SharedConstraint> extract_shared_constraints(const GoalInstruction& instruction) {
  auto domain_rank = [&](const std::string& d) {
    auto it = std::find(instruction.domains.begin(), instruction.domains.end(), d);
    return static_cast<std::size_t>(it - instruction.domains.begin());
  };
  auto family = [](const std::string& suffix) -> std::string {
    if (suffix == "area" || suffix == "pricerange" || suffix == "book people") return suffix;
    if (suffix == "day" || suffix == "book day") return "day";
    if (suffix == "name" || suffix == "departure" || suffix == "destination") return "place";
    return {};
  };
  std::vector<SharedConstraint> out;
  const auto& pairs = instruction.explicit_pairs.items();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      SlotValue a = pairs[i], b = pairs[j];
      std::string da = slot_domain(a.first), db = slot_domain(b.first);
      if (da == db || normalize_value(a.second) != normalize_value(b.second)) continue;
      std::string fa = family(slot_suffix(a.first)), fb = family(slot_suffix(b.first));
      if (fa.empty() || fa != fb) continue;
      if (fa == "place") {
        // name <-> departure/destination only; two names never co-refer.
        bool a_name = slot_suffix(a.first) == "name", b_name = slot_suffix(b.first) == "name";
        if (a_name == b_name) continue;
      }
      if (domain_rank(db) < domain_rank(da)) {
        std::swap(a, b);
        std::swap(da, db);
      }
      SharedConstraint c{da, a.first, db, b.first};
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  return out;
}

void validate_template(const GoalTemplate& tmpl, const Schema& schema) {
  if (tmpl.domains.empty())
    throw ValidationError("template '" + tmpl.id + "': empty domain list");
  auto in_domains = [&](const std::string& d) {
    return std::find(tmpl.domains.begin(), tmpl.domains.end(), d) != tmpl.domains.end();
  };
  for (const auto& d : tmpl.domains)
    if (!schema.has_domain(d))
      throw ValidationError("template '" + tmpl.id + "': unknown domain '" + d + "'");
  for (const auto& ph : template_placeholders(tmpl.text)) {
    const SlotDef* def = schema.find_slot(ph.slot);
    if (def == nullptr)
      throw ValidationError("template '" + tmpl.id + "': unknown placeholder slot '" + ph.slot +
                            "'");
    if (!in_domains(def->domain))
      throw ValidationError("template '" + tmpl.id + "': placeholder slot '" + ph.slot +
                            "' outside the template domains");
  }
  for (const auto& c : tmpl.shared_constraints) {
    for (const auto& [d, s] : {std::pair{c.domain_a, c.slot_a}, std::pair{c.domain_b, c.slot_b}}) {
      const SlotDef* def = schema.find_slot(s);
      if (!in_domains(d) || def == nullptr || def->domain != d)
        throw ValidationError("template '" + tmpl.id + "': shared constraint references '" + d +
                              "/" + s + "'");
    }
  }
}

std::string templates_to_json(const std::vector<GoalTemplate>& templates) {
  ojson list = ojson::array();
  for (const auto& t : templates) {
    ojson j;
    j["id"] = t.id;
    j["text"] = t.text;
    j["domains"] = t.domains;
    j["placeholders"] = t.placeholder_slots;
    ojson cs = ojson::array();
    for (const auto& c : t.shared_constraints)
      cs.push_back({{"domain_a", c.domain_a},
                    {"slot_a", c.slot_a},
                    {"domain_b", c.domain_b},
                    {"slot_b", c.slot_b}});
    j["shared_constraints"] = cs;
    j["booking_slots"] = t.booking_slots;
    list.push_back(std::move(j));
  }
  return list.dump(1) + "\n";
}

std::vector<GoalTemplate> parse_templates(const std::string& json_text) {
  ojson list;
  try {
    list = ojson::parse(json_text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("template file: ") + e.what());
  }
  if (!list.is_array()) throw ParseError("template file: expected a list");
  std::vector<GoalTemplate> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& j = list[i];
    const std::string where = "template file: entry " + std::to_string(i);
    try {
      GoalTemplate t;
      t.id = j.at("id").get<std::string>();
      t.text = j.at("text").get<std::string>();
      t.domains = j.at("domains").get<std::vector<std::string>>();
      if (j.contains("shared_constraints")) {
        for (const auto& c : j.at("shared_constraints"))
          t.shared_constraints.push_back({c.at("domain_a").get<std::string>(),
                                          c.at("slot_a").get<std::string>(),
                                          c.at("domain_b").get<std::string>(),
                                          c.at("slot_b").get<std::string>()});
      }
      if (j.contains("booking_slots"))
        t.booking_slots = j.at("booking_slots").get<std::vector<std::string>>();
      // Placeholders are recomputed from the text; a stored list must agree.
      std::set<std::string> seen;
      for (const auto& ph : template_placeholders(t.text))
        if (seen.insert(ph.slot).second) t.placeholder_slots.push_back(ph.slot);
      if (j.contains("placeholders")) {
        auto stored = j.at("placeholders").get<std::vector<std::string>>();
        if (std::set<std::string>(stored.begin(), stored.end()) != seen)
          throw ParseError(where + " ('" + t.id + "'): placeholders disagree with text");
      }
      out.push_back(std::move(t));
    } catch (const ojson::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<GoalTemplate> load_templates(const std::string& path) {
  return parse_templates(read_file(path));
}

}  // namespace wozsynth
