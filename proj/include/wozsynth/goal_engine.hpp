// goal_engine.hpp
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
// Goal templates: delexicalization of goal instructions, constrained
// sampling of API call results, and re-instantiation of aligned goals.
//
// Template text syntax: a placeholder is "[<slot>]" or "[<slot>#<k>]" where
// k >= 2 numbers additional distinct values of the same slot (for example a
// fallback booking time). A literal '[' is written "[[".

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "wozsynth/rng.hpp"
#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

// value(domain_a, slot_a) must equal value(domain_b, slot_b).
struct SharedConstraint {
  std::string domain_a;
  std::string slot_a;
  std::string domain_b;
  std::string slot_b;
  friend bool operator==(const SharedConstraint&, const SharedConstraint&) = default;
};

struct GoalTemplate {
  std::string id;
  std::string text;
  std::vector<std::string> domains;            // transition order
  std::vector<std::string> placeholder_slots;  // unique, first-occurrence order
  std::vector<SharedConstraint> shared_constraints;
  std::vector<std::string> booking_slots;      // filled from the booking pools

  friend bool operator==(const GoalTemplate&, const GoalTemplate&) = default;
};

struct Placeholder {
  std::string key;   // text between the brackets
  std::string slot;  // key without the "#k" suffix
  int index = 1;
};

// One piece of template text: a literal run or a placeholder.
struct TemplatePiece {
  bool is_placeholder = false;
  std::string literal;
  Placeholder placeholder;
};

std::vector<TemplatePiece> parse_template_text(const std::string& text);

// Placeholder keys in first-occurrence order, unique.
std::vector<Placeholder> template_placeholders(const std::string& text);

// Replaces every occurrence of each explicit value with its placeholder,
// longest match first, left to right, in one pass. Matches must sit on word
// boundaries. Throws ValidationError when a value never occurs.
GoalTemplate delexicalize(const GoalInstruction& instruction);

// Fills placeholders from a key -> value map. Throws ValidationError on a
// key with no value.
std::string render_template(const std::string& template_text,
                            const std::map<std::string, std::string>& values);

// Value pools for booking-class slots, keyed by slot suffix
// ("book people", "book time", "leaveat", ...).
struct BookingPools {
  std::map<std::string, std::vector<std::string>> by_suffix;

  static BookingPools defaults();
  const std::vector<std::string>* find(const std::string& slot) const;
};

BookingPools parse_booking_pools(const std::string& json_text);

struct SamplingOptions {
  std::size_t max_rejections = 1000;
  // Exhaustive fallback is attempted only when the joint space is at most
  // this large.
  std::size_t exhaustive_limit = 5'000'000;
};

// One KB instance per template domain (first three domains), satisfying the
// template's shared constraints. A constraint whose slot is missing from
// one side holds vacuously; the missing side inherits the value when the
// goal is instantiated. Throws UnsatisfiableError if no joint assignment
// exists, ValidationError if a domain has no instances.
APICallResultSet sample_api_results(const GoalTemplate& tmpl, const KnowledgeBase& kb, Rng& rng,
                                    const SamplingOptions& options = {});

bool satisfies_constraints(const GoalTemplate& tmpl, const APICallResultSet& results);

// Aligns a template with sampled results. Placeholder resolution order:
// the serving instance's own value, a shared-constraint partner's value,
// then a booking-pool draw. Throws ValidationError naming an unresolvable
// slot.
GoalInstruction instantiate(const GoalTemplate& tmpl, const APICallResultSet& results,
                            const Schema& schema, Rng& rng,
                            const BookingPools& pools = BookingPools::defaults());

// Heuristic: equal values across domains on the same slot suffix
// (area, pricerange, day, people), or a name feeding a taxi/train
// departure or destination.
std::vector<SharedConstraint> extract_shared_constraints(const GoalInstruction& instruction);

void validate_template(const GoalTemplate& tmpl, const Schema& schema);

std::string templates_to_json(const std::vector<GoalTemplate>& templates);
std::vector<GoalTemplate> parse_templates(const std::string& json_text);
std::vector<GoalTemplate> load_templates(const std::string& path);

}  // namespace wozsynth
