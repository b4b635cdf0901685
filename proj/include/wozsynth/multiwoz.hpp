// multiwoz.hpp
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
// Ingestion of a MultiWOZ 2.1 directory: data.json, <domain>_db.json,
// valListFile / testListFile.
//
// Turn t pairs the previous system response with user utterance t, so the
// first system utterance is empty. B_t is read from the metadata of the
// system response that follows user utterance t.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

struct IngestStats {
  std::map<std::string, std::size_t> dialogues_per_split;
  // split -> domain -> dialogues tagged with the domain
  std::map<std::string, std::map<std::string, std::size_t>> domain_dialogues;
  std::size_t turns = 0;
  std::size_t goal_pairs_kept = 0;
  std::size_t goal_pairs_dropped = 0;  // value not found in the goal text
  std::size_t ignored_state_values = 0;  // domains outside the schema
};

struct IngestResult {
  Schema schema;
  KnowledgeBase kb;
  Corpus corpus;
  std::vector<GoalInstruction> goals;  // parallel to corpus
  IngestStats stats;
};

// Strips markup from the goal message list and normalizes it.
std::string goal_text_from_messages(const std::vector<std::string>& messages);

// "dont care" spellings -> "Dontcare"; "not mentioned", "none" and "" ->
// empty (absent); everything else normalized and canonicalized.
std::string normalize_state_value(const SlotDef& slot, const std::string& raw);

// Ingests an in-memory data.json document. Split lists hold dialogue ids
// (with or without ".json"); unlisted dialogues are train.
IngestResult ingest_multiwoz_data(const std::string& data_json, const Schema& schema,
                                  const KnowledgeBase& kb, const std::vector<std::string>& val_ids,
                                  const std::vector<std::string>& test_ids);

// Reads a MultiWOZ directory. Throws ConfigError when data.json is missing,
// ValidationError for a missing DB file of a referenced domain or a state
// value on an unknown slot.
IngestResult ingest_multiwoz(const std::string& dir, const Schema& schema);

}  // namespace wozsynth
