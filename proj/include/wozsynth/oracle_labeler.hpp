// oracle_labeler.hpp
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
// Offline Labeler backends. OracleLabeler reads the surface forms the
// surrogate Collector writes; it sees only (context, question, options),
// never the planted gold. RandomLabeler draws seeded logits.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wozsynth/labeler.hpp"
#include "wozsynth/schema_kb.hpp"

namespace wozsynth {

class OracleLabeler : public LabelerBackend {
 public:
  // Throws ConfigError when two informable slots share a question.
  OracleLabeler(Schema schema, LabelerConfig config);

  std::vector<double> score(const std::string& context, const std::string& question,
                            const std::vector<std::string>& options) const override;

 private:
  std::vector<double> score_slot(const SlotDef& slot, const std::string& context,
                                 const std::vector<std::string>& options) const;
  std::vector<double> score_domain(const std::string& context,
                                   const std::vector<std::string>& options) const;

  Schema schema_;
  LabelerConfig config_;
  std::map<std::string, const SlotDef*> by_question_;
};

class RandomLabeler : public LabelerBackend {
 public:
  explicit RandomLabeler(std::uint64_t seed) : seed_(seed) {}

  // Deterministic in (seed, context, question, options).
  std::vector<double> score(const std::string& context, const std::string& question,
                            const std::vector<std::string>& options) const override;

 private:
  std::uint64_t seed_;
};

}  // namespace wozsynth
