// oracle_labeler.cpp
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

#include "wozsynth/oracle_labeler.hpp"

#include "wozsynth/collector.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/rng.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/surrogate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

namespace {

constexpr std::size_t kNoMatch = static_cast<std::size_t>(-1);

bool boundary_before(const std::string& s, std::size_t pos) {
  return pos == 0 || !is_word_char(s[pos - 1]);
}

bool boundary_after(const std::string& s, std::size_t end) {
  return end >= s.size() || !is_word_char(s[end]);
}

// Start of the last whole-word occurrence of needle, or kNoMatch.
std::size_t last_match(const std::string& hay, const std::string& needle) {
  if (needle.empty() || needle.size() > hay.size()) return kNoMatch;
  std::size_t pos = hay.rfind(needle);
  while (pos != std::string::npos) {
    if (boundary_before(hay, pos) && boundary_after(hay, pos + needle.size())) return pos;
    if (pos == 0) break;
    pos = hay.rfind(needle, pos - 1);
  }
  return kNoMatch;
}

std::vector<double> one_hot(std::size_t n, std::size_t k) {
  std::vector<double> out(n, 0.0);
  out[k] = 1.0;
  return out;
}

}  // namespace

OracleLabeler::OracleLabeler(Schema schema, LabelerConfig config)
    : schema_(std::move(schema)), config_(std::move(config)) {
  for (const SlotDef* s : schema_.informable_slots()) {
    auto [it, fresh] = by_question_.emplace(s->description, s);
    if (!fresh)
      throw ConfigError("slots '" + it->second->name + "' and '" + s->name +
                        "' share the same question");
  }
}

std::vector<double> OracleLabeler::score(const std::string& context, const std::string& question,
                                         const std::vector<std::string>& options) const {
  if (options.empty()) return {};
  if (question == config_.domain_question) return score_domain(context, options);
  auto it = by_question_.find(question);
  if (it == by_question_.end()) throw ValidationError("oracle labeler: unknown question '" + question + "'");
  return score_slot(*it->second, context, options);
}

std::vector<double> OracleLabeler::score_slot(const SlotDef& slot, const std::string& context,
                                              const std::vector<std::string>& options) const {
  const std::string hay = to_lower(context);
  const std::string prefix = escape_text(mention_phrase(slot.name)) + " is ";
  std::size_t best = kNoMatch;
  std::size_t best_pos = 0;
  std::size_t best_len = 0;
  std::size_t none_index = kNoMatch;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (is_none(options[i])) {
      if (none_index == kNoMatch) none_index = i;
      continue;
    }
    const std::string needle = prefix + escape_text(to_lower(options[i]));
    const std::size_t pos = last_match(hay, needle);
    if (pos == kNoMatch) continue;
    // Latest mention wins; at equal position the longer value does.
    if (best == kNoMatch || pos > best_pos || (pos == best_pos && needle.size() > best_len)) {
      best = i;
      best_pos = pos;
      best_len = needle.size();
    }
  }
  if (best == kNoMatch) best = none_index == kNoMatch ? options.size() - 1 : none_index;
  return one_hot(options.size(), best);
}

std::vector<double> OracleLabeler::score_domain(const std::string& context,
                                                const std::vector<std::string>& options) const {
  const std::string hay = to_lower(context);
  std::size_t best = 0;
  std::size_t best_pos = kNoMatch;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const std::string d = to_lower(options[i]);
    std::size_t pos = last_match(hay, escape_text(domain_opening_phrase(d)));
    for (const SlotDef* s : schema_.informable_slots(d)) {
      std::size_t p = last_match(hay, escape_text(mention_phrase(s->name)) + " is");
      if (p != kNoMatch && (pos == kNoMatch || p > pos)) pos = p;
    }
    if (pos != kNoMatch && (best_pos == kNoMatch || pos > best_pos)) {
      best = i;
      best_pos = pos;
    }
  }
  return one_hot(options.size(), best);
}

std::vector<double> RandomLabeler::score(const std::string& context, const std::string& question,
                                         const std::vector<std::string>& options) const {
  std::uint64_t h = fnv1a64(context);
  h = derive_seed(h, {fnv1a64(question)});
  for (const auto& o : options) h = derive_seed(h, {fnv1a64(o)});
  Rng rng(derive_seed(seed_, {h}));
  std::vector<double> out(options.size());
  for (double& x : out) x = rng.uniform_real() * 4.0 - 2.0;
  return out;
}

}  // namespace wozsynth
