// schema_kb.cpp
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

#include "wozsynth/schema_kb.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

Schema::Schema() : data_(std::make_shared<Data>()) {}

Schema::Schema(std::vector<DomainSchema> domains) {
  auto data = std::make_shared<Data>();
  data->domains = std::move(domains);
  for (auto& d : data->domains) {
    for (auto& slot : d.slots) {
      if (slot.domain.empty()) slot.domain = d.domain;
      if (slot.domain != d.domain || slot_domain(slot.name) != d.domain)
        throw ValidationError("slot '" + slot.name + "' does not carry the '" + d.domain +
                              "-' domain prefix");
      if (slot.informable() && slot.description.empty())
        throw ValidationError("informable slot '" + slot.name + "' has an empty description");
      auto [it, inserted] = data->slot_pos.emplace(slot.name, data->slots_by_pos.size());
      if (!inserted) throw ValidationError("duplicate slot name '" + slot.name + "'");
      data->slots_by_pos.push_back(&slot);
      if (slot.informable()) data->informable.push_back(&slot);
    }
  }
  data_ = std::move(data);
}

const DomainSchema* Schema::find_domain(std::string_view domain) const {
  for (const auto& d : data_->domains)
    if (d.domain == domain) return &d;
  return nullptr;
}

const SlotDef* Schema::find_slot(std::string_view name) const {
  auto it = data_->slot_pos.find(std::string(name));
  return it == data_->slot_pos.end() ? nullptr : data_->slots_by_pos[it->second];
}

std::size_t Schema::slot_order(std::string_view name) const {
  auto it = data_->slot_pos.find(std::string(name));
  return it == data_->slot_pos.end() ? npos : it->second;
}

std::vector<const SlotDef*> Schema::informable_slots(std::string_view domain) const {
  std::vector<const SlotDef*> out;
  for (const auto* s : data_->informable)
    if (s->domain == domain) out.push_back(s);
  return out;
}

std::vector<std::string> Schema::domain_names() const {
  std::vector<std::string> out;
  for (const auto& d : data_->domains) out.push_back(d.domain);
  return out;
}

namespace {

std::size_t line_of(std::string_view doc, std::size_t byte) {
  byte = std::min(byte, doc.size());
  return 1 + static_cast<std::size_t>(std::count(doc.begin(), doc.begin() + byte, '\n'));
}

// Parses JSON, rejecting duplicate object keys (nlohmann silently keeps the
// last one).
ojson parse_strict(std::string_view doc, const std::string& what) {
  std::vector<std::set<std::string>> keys;
  std::string duplicate;
  ojson::parser_callback_t cb = [&](int, ojson::parse_event_t event, ojson& parsed) {
    switch (event) {
      case ojson::parse_event_t::object_start:
        keys.emplace_back();
        break;
      case ojson::parse_event_t::object_end:
        if (!keys.empty()) keys.pop_back();
        break;
      case ojson::parse_event_t::key:
        if (!keys.empty() && !keys.back().insert(parsed.get<std::string>()).second &&
            duplicate.empty())
          duplicate = parsed.get<std::string>();
        break;
      default:
        break;
    }
    return true;
  };
  ojson j;
  try {
    j = ojson::parse(doc.begin(), doc.end(), cb);
  } catch (const ojson::parse_error& e) {
    throw ParseError(what + ": line " + std::to_string(line_of(doc, e.byte)) + ": " + e.what());
  }
  if (!duplicate.empty())
    throw ValidationError(what + ": duplicate key '" + duplicate + "'");
  return j;
}

std::string require_string(const ojson& j, const std::string& field) {
  if (!j.is_string()) throw ParseError("field '" + field + "': expected a string");
  return j.get<std::string>();
}

}  // namespace

Schema parse_schema(std::string_view document) {
  ojson j = parse_strict(document, "schema document");
  if (!j.is_object()) throw ParseError("schema document: top level must be an object");
  std::vector<DomainSchema> domains;
  if (!j.contains("domains")) return Schema{};
  const auto& jd = j.at("domains");
  if (!jd.is_object()) throw ParseError("field 'domains': expected an object");
  for (auto it = jd.begin(); it != jd.end(); ++it) {
    DomainSchema d;
    d.domain = it.key();
    const std::string base = "domains." + d.domain;
    if (!it->is_object() || !it->contains("slots") || !it->at("slots").is_object())
      throw ParseError("field '" + base + ".slots': expected an object");
    const auto& js = it->at("slots");
    for (auto st = js.begin(); st != js.end(); ++st) {
      const std::string field = base + ".slots." + st.key();
      if (!st->is_object()) throw ParseError("field '" + field + "': expected an object");
      SlotDef slot;
      slot.domain = d.domain;
      slot.name = st.key();
      std::string kind = st->contains("kind") ? require_string(st->at("kind"), field + ".kind")
                                              : std::string("informable");
      if (kind == "informable") {
        slot.kind = SlotKind::kInformable;
      } else if (kind == "requestable") {
        slot.kind = SlotKind::kRequestable;
      } else {
        throw ParseError("field '" + field + ".kind': invalid slot kind '" + kind + "'");
      }
      if (st->contains("description"))
        slot.description = require_string(st->at("description"), field + ".description");
      if (st->contains("value_vocab")) {
        const auto& v = st->at("value_vocab");
        if (!v.is_array()) throw ParseError("field '" + field + ".value_vocab': expected an array");
        for (std::size_t i = 0; i < v.size(); ++i)
          slot.value_vocab.push_back(
              require_string(v[i], field + ".value_vocab[" + std::to_string(i) + "]"));
      }
      d.slots.push_back(std::move(slot));
    }
    domains.push_back(std::move(d));
  }
  return Schema(std::move(domains));
}

Schema load_schema(const std::string& path) {
  return parse_schema(read_file(path));
}

std::string schema_to_json(const Schema& schema) {
  ojson j;
  j["domains"] = ojson::object();
  for (const auto& d : schema.domains()) {
    ojson slots = ojson::object();
    for (const auto& s : d.slots) {
      ojson js;
      js["kind"] = s.informable() ? "informable" : "requestable";
      js["description"] = s.description;
      if (!s.value_vocab.empty()) js["value_vocab"] = s.value_vocab;
      slots[s.name] = js;
    }
    j["domains"][d.domain]["slots"] = slots;
  }
  return j.dump(2) + "\n";
}

const std::string* KBInstance::value_of(std::string_view slot) const {
  for (const auto& [s, v] : pairs)
    if (s == slot) return &v;
  return nullptr;
}

KnowledgeBase::KnowledgeBase(const Schema& schema, std::vector<KBInstance> instances)
    : schema_(schema) {
  for (auto& inst : instances) {
    if (!schema.has_domain(inst.domain))
      throw ValidationError("KB instance for unknown domain '" + inst.domain + "'");
    std::set<std::string> seen;
    for (auto& [slot, value] : inst.pairs) {
      const SlotDef* def = schema.find_slot(slot);
      if (def == nullptr || def->domain != inst.domain)
        throw ValidationError("KB instance of domain '" + inst.domain + "' has unknown slot '" +
                              slot + "'");
      if (!seen.insert(slot).second)
        throw ValidationError("KB instance repeats slot '" + slot + "'");
      value = collapse_whitespace(value);
    }
    std::stable_sort(inst.pairs.begin(), inst.pairs.end(), [&](const auto& a, const auto& b) {
      return schema.slot_order(a.first) < schema.slot_order(b.first);
    });
    auto& bucket = by_domain_[inst.domain];
    for (const auto& [slot, value] : inst.pairs)
      index_[{slot, normalize_value(value)}].push_back(bucket.size());
    bucket.push_back(std::move(inst));
  }
}

const std::vector<KBInstance>& KnowledgeBase::instances(std::string_view domain) const {
  static const std::vector<KBInstance> kEmpty;
  auto it = by_domain_.find(domain);
  return it == by_domain_.end() ? kEmpty : it->second;
}

bool KnowledgeBase::has_domain(std::string_view domain) const {
  return by_domain_.find(domain) != by_domain_.end();
}

std::size_t KnowledgeBase::size() const {
  std::size_t n = 0;
  for (const auto& [d, v] : by_domain_) n += v.size();
  return n;
}

std::vector<std::string> KnowledgeBase::domains() const {
  std::vector<std::string> out;
  for (const auto& [d, v] : by_domain_) out.push_back(d);
  return out;
}

bool KnowledgeBase::domain_has_slot(std::string_view domain, std::string_view slot) const {
  for (const auto& inst : instances(domain))
    if (inst.value_of(slot)) return true;
  return false;
}

std::vector<KBInstance> query_kb(const KnowledgeBase& kb, std::string_view domain,
                                 const std::vector<SlotValue>& constraints) {
  if (!kb.schema_.has_domain(domain))
    throw ValidationError("query_kb: unknown domain '" + std::string(domain) + "'");
  std::vector<std::pair<std::string, std::string>> norm;
  for (const auto& [slot, value] : constraints) {
    const SlotDef* def = kb.schema_.find_slot(slot);
    if (def == nullptr || def->domain != domain)
      throw ValidationError("query_kb: slot '" + slot + "' is not a slot of domain '" +
                            std::string(domain) + "'");
    if (!def->informable())
      throw ValidationError("query_kb: constraint on requestable slot '" + slot + "'");
    norm.emplace_back(slot, normalize_value(value));
  }
  const auto& all = kb.instances(domain);
  if (norm.empty()) return all;

  // Candidates from the index of the first constraint, then verify the rest.
  auto it = kb.index_.find(norm.front());
  if (it == kb.index_.end()) return {};
  std::vector<KBInstance> out;
  for (std::size_t idx : it->second) {
    const auto& inst = all[idx];
    if (inst.domain != domain) continue;
    bool ok = true;
    for (std::size_t c = 1; c < norm.size() && ok; ++c) {
      const std::string* v = inst.value_of(norm[c].first);
      ok = v != nullptr && normalize_value(*v) == norm[c].second;
    }
    if (ok) out.push_back(inst);
  }
  return out;
}

std::optional<std::string> multiwoz_slot_name(const Schema& schema, std::string_view domain,
                                              std::string_view raw_key) {
  std::string name = std::string(domain) + "-" + normalize_value(raw_key);
  if (schema.find_slot(name)) return name;
  return std::nullopt;
}

std::string canonical_value(const SlotDef& slot, std::string_view value) {
  std::string v = normalize_value(value);
  if (slot.value_vocab.empty()) return v;
  for (const auto& allowed : slot.value_vocab)
    if (normalize_value(allowed) == v) return allowed;
  auto has = [&](const char* w) {
    return std::find(slot.value_vocab.begin(), slot.value_vocab.end(), w) !=
           slot.value_vocab.end();
  };
  if (has("yes") && (v == "free" || v == "true" || v == "y")) return "yes";
  if (has("no") && (v == "false" || v == "n")) return "no";
  return v;
}

namespace {

std::string scalar_to_string(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os << v.get<double>();
    return os.str();
  }
  return {};
}

std::vector<KBInstance> load_domain_db(const Schema& schema, const std::string& domain,
                                       const ojson& j, const std::string& file) {
  std::vector<KBInstance> out;
  if (j.is_object() && j.contains("taxi_colors") && j.contains("taxi_types")) {
    // taxi_db.json describes a fleet rather than records: expand colors x types.
    const auto& colors = j.at("taxi_colors");
    const auto& types = j.at("taxi_types");
    const ojson phones = j.value("taxi_phone", ojson::array());
    std::size_t k = 0;
    for (const auto& c : colors) {
      for (const auto& t : types) {
        KBInstance inst{domain, {}};
        if (schema.find_slot(domain + "-car type"))
          inst.pairs.emplace_back(domain + "-car type",
                                  scalar_to_string(c) + " " + scalar_to_string(t));
        if (!phones.empty() && schema.find_slot(domain + "-phone"))
          inst.pairs.emplace_back(domain + "-phone", scalar_to_string(phones[k % phones.size()]));
        ++k;
        out.push_back(std::move(inst));
      }
    }
    return out;
  }
  if (!j.is_array()) throw ParseError(file + ": expected a list of records");
  for (const auto& rec : j) {
    if (!rec.is_object()) throw ParseError(file + ": expected record objects");
    KBInstance inst{domain, {}};
    for (auto it = rec.begin(); it != rec.end(); ++it) {
      auto slot = multiwoz_slot_name(schema, domain, it.key());
      if (!slot) continue;
      std::string value = scalar_to_string(*it);
      if (collapse_whitespace(value).empty()) continue;
      const SlotDef* def = schema.find_slot(*slot);
      inst.pairs.emplace_back(*slot, def->informable() ? canonical_value(*def, value)
                                                       : collapse_whitespace(value));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

KnowledgeBase load_multiwoz_db_dir(const Schema& schema, const std::string& dir,
                                   const std::vector<std::string>& required_domains) {
  namespace fs = std::filesystem;
  std::vector<KBInstance> all;
  for (const auto& d : schema.domains()) {
    fs::path file = fs::path(dir) / (d.domain + "_db.json");
    if (!fs::exists(file)) {
      if (std::find(required_domains.begin(), required_domains.end(), d.domain) !=
          required_domains.end())
        throw ValidationError("missing DB file for domain '" + d.domain + "': " + file.string());
      continue;
    }
    std::string text = read_file(file.string());
    ojson j;
    try {
      j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
      throw ParseError(file.string() + ": line " + std::to_string(line_of(text, e.byte)) + ": " +
                       e.what());
    }
    auto inst = load_domain_db(schema, d.domain, j, file.string());
    all.insert(all.end(), std::make_move_iterator(inst.begin()),
               std::make_move_iterator(inst.end()));
  }
  return KnowledgeBase(schema, std::move(all));
}

KnowledgeBase load_kb(const Schema& schema, const std::string& path) {
  if (std::filesystem::is_directory(path)) return load_multiwoz_db_dir(schema, path, {});
  std::string text = read_file(path);
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(path + ": line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(path + ": expected an object keyed by domain");
  std::vector<KBInstance> all;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it->is_array()) throw ParseError(path + ": field '" + it.key() + "': expected a list");
    std::size_t i = 0;
    for (const auto& rec : *it) {
      const std::string field = it.key() + "[" + std::to_string(i++) + "]";
      if (!rec.is_object()) throw ParseError(path + ": field '" + field + "': expected an object");
      KBInstance inst{it.key(), {}};
      for (auto kv = rec.begin(); kv != rec.end(); ++kv)
        inst.pairs.emplace_back(kv.key(), require_string(*kv, field + "." + kv.key()));
      all.push_back(std::move(inst));
    }
  }
  return KnowledgeBase(schema, std::move(all));
}

std::string kb_to_json(const KnowledgeBase& kb) {
  ojson j = ojson::object();
  for (const auto& d : kb.domains()) {
    ojson list = ojson::array();
    for (const auto& inst : kb.instances(d)) {
      ojson rec = ojson::object();
      for (const auto& [s, v] : inst.pairs) rec[s] = v;
      list.push_back(std::move(rec));
    }
    j[d] = std::move(list);
  }
  return j.dump(1) + "\n";
}

}  // namespace wozsynth
