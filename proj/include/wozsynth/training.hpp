// training.hpp
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
// Training-file emission for the Collector (seq2seq) and the Labeler
// (multiple choice). Both files are JSON lines whose first line is a
// header object carrying "format" and "version".

#pragma once

#include <cstddef>
#include <string>

#include "wozsynth/labeler.hpp"
#include "wozsynth/schema_kb.hpp"
#include "wozsynth/types.hpp"

namespace wozsynth {

inline constexpr double kLabelSmoothing = 0.1;

struct CollectorExample {
  std::string source;
  std::string target;
  std::size_t target_tokens = 0;
};

// Throws ValidationError when the dialogue has no goal.
CollectorExample collector_training_example(const AnnotatedDialogue& dialogue);

struct CollectorManifest {
  std::size_t dialogues = 0;
  std::size_t target_tokens = 0;   // summed over targets
  std::size_t sources_over_cap = 0;
  double label_smoothing = kLabelSmoothing;
};

struct CollectorTraining {
  std::string jsonl;
  CollectorManifest manifest;
};

CollectorTraining emit_collector_training(const Corpus& corpus);

struct LabelerManifest {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t records = 0;    // one per emitted question
  std::size_t none_answers = 0;
  std::size_t non_none_answers = 0;
  std::size_t skipped_domain_questions = 0;  // gold active domain not an option
  double beta = kDefaultBeta;
};

struct LabelerTraining {
  std::string jsonl;
  LabelerManifest manifest;
};

// Option sets come from the ground-truth states of each dialogue. Records
// answering anything but "None" get weight beta, the others 1. Throws
// ValidationError when a gold value is missing from its option set.
LabelerTraining emit_labeler_training(const Corpus& corpus, const Schema& schema,
                                      const LabelerConfig& config, double beta = kDefaultBeta);

std::string manifest_json(const CollectorManifest& m);
std::string manifest_json(const LabelerManifest& m);

}  // namespace wozsynth
