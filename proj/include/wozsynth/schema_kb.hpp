// schema_kb.hpp
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
// Domain schemas and the file-backed knowledge base.

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wozsynth {

enum class SlotKind { kInformable, kRequestable };

struct SlotDef {
  std::string domain;
  std::string name;  // "restaurant-pricerange"
  SlotKind kind = SlotKind::kInformable;
  std::string description;  // labeling question for informable slots
  std::vector<std::string> value_vocab;  // empty = open class

  bool informable() const { return kind == SlotKind::kInformable; }
};

struct DomainSchema {
  std::string domain;
  std::vector<SlotDef> slots;
};

using SlotValue = std::pair<std::string, std::string>;

// A set of domain schemas with global slot lookup. Slot order (domain order,
// then slot order within the domain) is the "schema order" used whenever
// slot-value pairs are serialized. Immutable; copies share storage.
class Schema {
 public:
  Schema();
  explicit Schema(std::vector<DomainSchema> domains);

  const std::vector<DomainSchema>& domains() const { return data_->domains; }
  const DomainSchema* find_domain(std::string_view domain) const;
  const SlotDef* find_slot(std::string_view name) const;
  bool has_domain(std::string_view domain) const { return find_domain(domain) != nullptr; }

  // Position of the slot in schema order, or npos.
  std::size_t slot_order(std::string_view name) const;

  // Informable slots across all domains, in schema order.
  const std::vector<const SlotDef*>& informable_slots() const { return data_->informable; }
  std::vector<const SlotDef*> informable_slots(std::string_view domain) const;

  std::vector<std::string> domain_names() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  struct Data {
    std::vector<DomainSchema> domains;
    std::unordered_map<std::string, std::size_t> slot_pos;
    std::vector<const SlotDef*> slots_by_pos;
    std::vector<const SlotDef*> informable;
  };
  std::shared_ptr<const Data> data_;
};

// Parses a toolkit-native schema document:
//   {"domains": {"<domain>": {"slots": {"<slot>": {kind, description, value_vocab}}}}}
// Throws ParseError (with line/field context) or ValidationError.
Schema parse_schema(std::string_view document);
Schema load_schema(const std::string& path);
std::string schema_to_json(const Schema& schema);

// The bundled five-domain MultiWOZ 2.1 schema (30 informable slots).
const Schema& default_multiwoz_schema();
std::string_view default_multiwoz_schema_json();

struct KBInstance {
  std::string domain;
  std::vector<SlotValue> pairs;  // schema order, unique slots

  const std::string* value_of(std::string_view slot) const;
};

// Immutable once built; safe for concurrent reads.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  // Validates every instance against the schema and sorts pairs into
  // schema order. Instance order within a domain is preserved.
  KnowledgeBase(const Schema& schema, std::vector<KBInstance> instances);

  const std::vector<KBInstance>& instances(std::string_view domain) const;
  bool has_domain(std::string_view domain) const;
  std::size_t size() const;
  std::vector<std::string> domains() const;

  // True if any instance of the domain carries the slot.
  bool domain_has_slot(std::string_view domain, std::string_view slot) const;

 private:
  friend std::vector<KBInstance> query_kb(const KnowledgeBase&, std::string_view,
                                          const std::vector<SlotValue>&);

  Schema schema_;
  std::map<std::string, std::vector<KBInstance>, std::less<>> by_domain_;
  // (slot, normalized value) -> instance indices within the domain, ascending.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> index_;
};

// Instances of `domain` whose pairs contain every constraint. Values match
// case-insensitively after whitespace normalization. Result order follows
// load order. Throws ValidationError on unknown domain, unknown slot, or a
// constraint on a requestable slot.
std::vector<KBInstance> query_kb(const KnowledgeBase& kb, std::string_view domain,
                                 const std::vector<SlotValue>& constraints);

// KB file loading. `path` is either a toolkit-native kb.json
// ({"<domain>": [{slot: value}, ...]}) or a directory of MultiWOZ
// "<domain>_db.json" files.
KnowledgeBase load_kb(const Schema& schema, const std::string& path);
KnowledgeBase load_multiwoz_db_dir(const Schema& schema, const std::string& dir,
                                   const std::vector<std::string>& required_domains);
std::string kb_to_json(const KnowledgeBase& kb);

// Maps a raw MultiWOZ key ("pricerange", "leaveAt") to a schema slot name,
// or nullopt when the key has no schema slot.
std::optional<std::string> multiwoz_slot_name(const Schema& schema, std::string_view domain,
                                              std::string_view raw_key);

// Canonicalizes a value for a slot with a closed vocabulary ("free" -> "yes").
std::string canonical_value(const SlotDef& slot, std::string_view value);

}  // namespace wozsynth
