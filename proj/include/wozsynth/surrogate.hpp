// surrogate.hpp
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
// Rule-based Collector backend. It never calls a model: given (G, A) it
// plans a short dialogue in which user turns state the goal constraints in
// order and one system turn recommends an API-only value. Every mention is
// rendered as "<domain> <slot suffix> is <value>", which is the surface
// form OracleLabeler reads back.

#pragma once

#include <string>
#include <vector>

#include "wozsynth/collector.hpp"

namespace wozsynth {

// "restaurant-book people" -> "restaurant book people".
std::string mention_phrase(const std::string& slot);

// Phrase used when a user turn opens a domain without stating a value.
std::string domain_opening_phrase(const std::string& domain);

struct SurrogatePlan {
  std::vector<Turn> turns;
  // Planted gold: B_t and domain_t after each turn.
  std::vector<TurnAnnotation> gold;
};

SurrogatePlan plan_surrogate_dialogue(const CollectorInput& input, const GenerationParams& params,
                                      const Schema& schema);

class SurrogateCollector : public CollectorBackend {
 public:
  explicit SurrogateCollector(Schema schema) : schema_(std::move(schema)) {}

  BackendCapabilities capabilities() const override;
  GenerationResult generate(const CollectorInput& input,
                            const GenerationParams& params) const override;

 private:
  Schema schema_;
};

// The surrogate as a function, returning the parsed dialogue.
Dialogue surrogate_generate(const CollectorInput& input, const GenerationParams& params,
                            const Schema& schema);

}  // namespace wozsynth
