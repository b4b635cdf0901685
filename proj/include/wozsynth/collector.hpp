// collector.hpp
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
// Dialogue generation side: input serialization, the backend interface,
// and parsing of generated dialogues.
//
// Wire layout of a Collector input:
//
//   <s> G </s> <domain> d1 <slot> s1 v1 <slot> s2 v2 ... <domain> d2 ...
//
// Tokens are single-space separated. Free text (goal text, values, slot
// names) is escaped so '<' never appears outside a marker: '&' -> "&amp;",
// '<' -> "&lt;".

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

namespace tok {
inline constexpr std::string_view kStart = "<s>";
inline constexpr std::string_view kSep = "</s>";
inline constexpr std::string_view kDomain = "<domain>";
inline constexpr std::string_view kSlot = "<slot>";
inline constexpr std::string_view kSystem = "<system>";
inline constexpr std::string_view kUser = "<user>";
}  // namespace tok

std::string escape_text(std::string_view s);
std::string unescape_text(std::string_view s);

inline constexpr std::size_t kCollectorMaxSource = 768;

struct CollectorInput {
  std::string text;
  GoalInstruction goal;
  APICallResultSet api;
};

// Throws ValidationError when more than three results are given.
CollectorInput serialize_input(const GoalInstruction& instruction, const APICallResultSet& results);

struct ParsedCollectorInput {
  struct Result {
    std::string domain;
    std::vector<SlotValue> pairs;
  };
  std::string goal_text;
  std::vector<Result> results;
};

// Inverse of serialize_input. The schema disambiguates where a slot name
// ends and its value begins.
ParsedCollectorInput parse_input(std::string_view text, const Schema& schema);

// "<system> r1 <user> u1 ..." with escaped utterances.
std::string render_dialogue(const std::vector<Turn>& turns);

struct ParseReport {
  bool truncated_trailing_system = false;
};

// Parses role-marked text. The text must start with <system> and alternate
// strictly; utterances must be non-empty. A trailing system turn without a
// user reply is dropped and reported. Throws MalformedGenerationError.
Dialogue parse_generated(const std::string& raw, ParseReport* report = nullptr);

struct GenerationParams {
  double top_p = 0.92;
  double temperature = 1.0;
  int max_tokens = 512;
  std::uint64_t seed = 0;

  // Throws ConfigError when top_p is outside (0, 1] or temperature <= 0.
  void validate() const;
};

struct BackendCapabilities {
  std::size_t max_input_symbols = kCollectorMaxSource;
  bool returns_logprobs = false;
  bool deterministic = true;
};

struct GenerationResult {
  std::string text;
  std::optional<std::vector<double>> token_logprobs;
};

// Implementations must tolerate concurrent calls.
class CollectorBackend {
 public:
  virtual ~CollectorBackend() = default;
  virtual BackendCapabilities capabilities() const = 0;
  virtual GenerationResult generate(const CollectorInput& input,
                                    const GenerationParams& params) const = 0;
};

// One generation call plus parsing. Throws BackendError (transport),
// ValidationError (input too long) or MalformedGenerationError.
Dialogue generate(const CollectorBackend& backend, const CollectorInput& input,
                  const GenerationParams& params, ParseReport* report = nullptr);

struct GenerationOutcome {
  std::optional<Dialogue> dialogue;
  std::optional<std::vector<double>> token_logprobs;
  std::vector<std::string> failures;  // one reason per failed attempt
  int attempts = 0;
  std::uint64_t seed = 0;  // seed of the accepted attempt
  bool truncated_trailing_system = false;
};

// Calls generate, resampling with a fresh per-attempt seed on malformed
// output or retryable transport errors, at most 1 + retry_budget times.
GenerationOutcome generate_with_retry(const CollectorBackend& backend, const CollectorInput& input,
                                      const GenerationParams& params, int retry_budget = 3);

}  // namespace wozsynth
