// corpus_io.hpp
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
// Corpus serialization. The native format is documented in
// docs/corpus_format.md.

#pragma once

#include <string>

#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

inline constexpr const char* kCorpusFormat = "wozsynth-corpus";
inline constexpr int kCorpusVersion = 1;

std::string corpus_to_json(const Corpus& corpus);
// Throws ParseError on malformed documents or unsupported versions. With a
// schema, state slots must be informable schema slots (ValidationError).
Corpus parse_corpus_json(const std::string& text, const Schema* schema = nullptr);
Corpus load_corpus(const std::string& path, const Schema* schema = nullptr);
void save_corpus(const std::string& path, const Corpus& corpus);

// One line per turn: {dialogue_id, turn_idx, system, user, belief_state,
// active_domain}; turn_idx counts from 1.
std::string corpus_to_turn_jsonl(const Corpus& corpus);

// Dialogue list in the layout DST trainers read: per turn system_transcript,
// transcript, belief_state [{slots: [[slot, value]], act: "inform"}],
// turn_label and domain; turn_idx counts from 0, Dontcare is written as
// "dontcare".
std::string corpus_to_trade_json(const Corpus& corpus);

}  // namespace wozsynth
