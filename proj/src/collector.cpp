// collector.cpp
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

#include "wozsynth/collector.hpp"

#include <algorithm>

#include "wozsynth/errors.hpp"
#include "wozsynth/rng.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else out.push_back(c);
  }
  return out;
}

std::string unescape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '&') {
      if (s.substr(i, 5) == "&amp;") {
        out.push_back('&');
        i += 4;
        continue;
      }
      if (s.substr(i, 4) == "&lt;") {
        out.push_back('<');
        i += 3;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

CollectorInput serialize_input(const GoalInstruction& instruction, const APICallResultSet& results) {
  if (results.size() > kMaxApiResults)
    throw ValidationError("serialize_input: " + std::to_string(results.size()) +
                          " API results exceed the cap of " + std::to_string(kMaxApiResults));
  std::string text;
  text += tok::kStart;
  text += ' ';
  text += escape_text(instruction.text);
  text += ' ';
  text += tok::kSep;
  for (const auto& inst : results.results) {
    text += ' ';
    text += tok::kDomain;
    text += ' ';
    text += escape_text(inst.domain);
    for (const auto& [slot, value] : inst.pairs) {
      text += ' ';
      text += tok::kSlot;
      text += ' ';
      text += escape_text(slot);
      text += ' ';
      text += escape_text(value);
    }
  }
  return CollectorInput{std::move(text), instruction, results};
}

namespace {

struct Segment {
  std::string marker;   // empty for the leading run
  std::string content;  // raw text up to the next marker, untrimmed
};

// Splits text at every '<'...'>' marker. Escaped content never contains '<'.
std::vector<Segment> split_markers(std::string_view text) {
  std::vector<Segment> out;
  out.push_back({});
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      auto close = text.find('>', i);
      if (close == std::string_view::npos) {
        out.back().content.append(text.substr(i));
        break;
      }
      out.push_back({std::string(text.substr(i, close - i + 1)), {}});
      i = close + 1;
      continue;
    }
    out.back().content.push_back(text[i]);
    ++i;
  }
  return out;
}

std::string strip_one_space(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == ' ') v.remove_prefix(1);
  if (!v.empty() && v.back() == ' ') v.remove_suffix(1);
  return std::string(v);
}

}  // namespace

ParsedCollectorInput parse_input(std::string_view text, const Schema& schema) {
  auto segs = split_markers(text);
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("collector input: " + why);
  };
  if (!collapse_whitespace(segs[0].content).empty() || segs.size() < 3 ||
      segs[1].marker != tok::kStart || segs[2].marker != tok::kSep)
    throw fail("expected '<s> G </s>' prefix");
  ParsedCollectorInput out;
  out.goal_text = unescape_text(strip_one_space(segs[1].content));
  if (!collapse_whitespace(segs[2].content).empty()) throw fail("text after separator");
  for (std::size_t k = 3; k < segs.size(); ++k) {
    const auto& seg = segs[k];
    if (seg.marker == tok::kDomain) {
      out.results.push_back({unescape_text(strip_one_space(seg.content)), {}});
    } else if (seg.marker == tok::kSlot) {
      if (out.results.empty()) throw fail("<slot> before any <domain>");
      std::string body = strip_one_space(seg.content);
      // Longest schema slot name of this domain that prefixes the body.
      const auto& domain = out.results.back().domain;
      const DomainSchema* ds = schema.find_domain(domain);
      if (ds == nullptr) throw fail("unknown domain '" + domain + "'");
      std::string best;
      for (const auto& slot : ds->slots) {
        std::string esc = escape_text(slot.name);
        if (body.size() > esc.size() && body.compare(0, esc.size(), esc) == 0 &&
            body[esc.size()] == ' ' && esc.size() > best.size())
          best = esc;
      }
      if (best.empty()) throw fail("unrecognized slot in '" + body + "'");
      out.results.back().pairs.emplace_back(unescape_text(best),
                                            unescape_text(body.substr(best.size() + 1)));
    } else {
      throw fail("unexpected marker '" + seg.marker + "'");
    }
  }
  return out;
}

std::string render_dialogue(const std::vector<Turn>& turns) {
  std::string out;
  for (const auto& t : turns) {
    if (!out.empty()) out += ' ';
    out += tok::kSystem;
    if (!t.system.empty()) out += " " + escape_text(t.system);
    out += ' ';
    out += tok::kUser;
    if (!t.user.empty()) out += " " + escape_text(t.user);
  }
  return out;
}

Dialogue parse_generated(const std::string& raw, ParseReport* report) {
  auto segs = split_markers(raw);
  auto fail = [&](const std::string& why) {
    return MalformedGenerationError("malformed generation: " + why, raw);
  };
  if (!collapse_whitespace(segs[0].content).empty()) throw fail("text before the first role marker");
  // Sequence-boundary tokens a model may echo are ignored.
  std::vector<Segment> roles;
  for (std::size_t k = 1; k < segs.size(); ++k) {
    const auto& m = segs[k].marker;
    if (m == tok::kStart || m == tok::kSep) {
      if (!collapse_whitespace(segs[k].content).empty())
        throw fail("text after sequence token '" + m + "'");
      continue;
    }
    if (m != tok::kSystem && m != tok::kUser) throw fail("unknown marker '" + m + "'");
    roles.push_back(segs[k]);
  }
  if (roles.empty()) throw fail("no role markers");
  Dialogue d;
  d.raw_text = raw;
  for (std::size_t k = 0; k < roles.size(); ++k) {
    const bool expect_system = k % 2 == 0;
    if ((roles[k].marker == tok::kSystem) != expect_system)
      throw fail("role markers do not alternate <system>, <user> at position " +
                 std::to_string(k));
    std::string utt = unescape_text(collapse_whitespace(roles[k].content));
    if (utt.empty()) throw fail("empty utterance at position " + std::to_string(k));
    if (expect_system) d.turns.push_back({utt, {}});
    else d.turns.back().user = utt;
  }
  if (roles.size() % 2 == 1) {
    d.turns.pop_back();
    if (report) report->truncated_trailing_system = true;
  }
  if (d.turns.empty()) throw fail("no complete system/user exchange");
  return d;
}

void GenerationParams::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0))
    throw ConfigError("top_p must lie in (0, 1], got " + std::to_string(top_p));
  if (!(temperature > 0.0))
    throw ConfigError("temperature must be positive, got " + std::to_string(temperature));
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

Dialogue generate(const CollectorBackend& backend, const CollectorInput& input,
                  const GenerationParams& params, ParseReport* report) {
  params.validate();
  const std::size_t len = count_tokens(input.text);
  const std::size_t cap = backend.capabilities().max_input_symbols;
  if (len > cap)
    throw ValidationError("collector input of " + std::to_string(len) +
                          " symbols exceeds backend capacity " + std::to_string(cap));
  GenerationResult result = backend.generate(input, params);
  return parse_generated(result.text, report);
}

GenerationOutcome generate_with_retry(const CollectorBackend& backend, const CollectorInput& input,
                                      const GenerationParams& params, int retry_budget) {
  GenerationOutcome out;
  params.validate();
  const std::size_t len = count_tokens(input.text);
  if (len > backend.capabilities().max_input_symbols)
    throw ValidationError("collector input of " + std::to_string(len) +
                          " symbols exceeds backend capacity");
  for (int attempt = 0; attempt <= retry_budget; ++attempt) {
    GenerationParams p = params;
    if (attempt > 0) p.seed = derive_seed(params.seed, {static_cast<std::uint64_t>(attempt)});
    ++out.attempts;
    try {
      GenerationResult result = backend.generate(input, p);
      ParseReport report;
      out.dialogue = parse_generated(result.text, &report);
      out.token_logprobs = std::move(result.token_logprobs);
      out.truncated_trailing_system = report.truncated_trailing_system;
      out.seed = p.seed;
      return out;
    } catch (const MalformedGenerationError& e) {
      out.failures.push_back(e.what());
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      out.failures.push_back(e.what());
    }
  }
  return out;
}

}  // namespace wozsynth
