// synthesizer.hpp
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
// End-to-end synthesis: template -> API results -> goal -> Collector ->
// Labeler, plus the corpus protocols for zero-shot and few-shot runs.
//
// Dialogue i draws from seed derive_seed(job.seed, {i}); draw k of it uses
// derive_seed(that, {k}). Output is ordered by i, so the parallel and the
// serial drivers produce the same corpus.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wozsynth/collector.hpp"
#include "wozsynth/dst_eval.hpp"
#include "wozsynth/goal_engine.hpp"
#include "wozsynth/labeler.hpp"

namespace wozsynth {

struct SynthesisJob {
  std::vector<GoalTemplate> templates;
  Schema schema;
  KnowledgeBase kb;
  std::size_t target_count = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> target_domain;  // zero-shot mode
  std::vector<double> top_p_grid = {0.92, 0.98};
  std::vector<double> temperature_grid = {0.7, 0.9, 1.0};
  int max_tokens = 512;
  int retry_budget = 3;            // extra generation attempts per draw
  std::size_t max_draws = 8;       // fresh (template, A) draws per dialogue
  BookingPools pools = BookingPools::defaults();
  SamplingOptions sampling;
  LabelerConfig labeler;
  std::string id_prefix = "synth";
  int jobs = 0;                    // worker threads; 0 = OpenMP default

  // Throws ConfigError: empty pool, target_count 0, empty grids, a
  // zero-shot pool member without the target domain, invalid templates.
  void validate() const;
};

struct DropRecord {
  std::size_t dialogue_index = 0;  // npos for job-level entries
  std::size_t draw = 0;
  std::string template_id;
  std::string reason;
};

struct SynthesisResult {
  Corpus corpus;
  std::vector<DropRecord> drop_log;
  std::size_t requested = 0;
  std::size_t shortfall = 0;
  std::size_t draws = 0;
  std::vector<std::string> skipped_templates;  // unsatisfiable under the KB
  CorpusStats stats;
};

// One draw from a fully specified seed, as recorded in provenance.seed.
// Returns nullopt and appends to `log` when the draw fails.
std::optional<AnnotatedDialogue> synthesize_draw(const SynthesisJob& job,
                                                 const std::vector<const GoalTemplate*>& pool,
                                                 std::uint64_t draw_seed, std::size_t index,
                                                 std::size_t draw, const CollectorBackend& collector,
                                                 const LabelerBackend& labeler,
                                                 std::vector<DropRecord>& log);

// Templates of the job that can be satisfied by the KB; the rest are
// reported in `skipped`.
std::vector<const GoalTemplate*> usable_templates(const SynthesisJob& job,
                                                  std::vector<std::string>& skipped);

SynthesisResult synthesize(const SynthesisJob& job, const CollectorBackend& collector,
                           const LabelerBackend& labeler);
SynthesisResult synthesize_serial(const SynthesisJob& job, const CollectorBackend& collector,
                                  const LabelerBackend& labeler);

// Throws ShortfallError when result.shortfall > 0.
void require_complete(const SynthesisResult& result);

std::string synthesis_report_json(const SynthesisResult& result);

// Drops every dialogue tagged with target_domain; order is kept. Throws
// ValidationError when the domain is neither a schema domain nor a tag.
Corpus leave_one_out(const Corpus& corpus, const std::string& target_domain, const Schema& schema);

// Throws ConfigError when no template mentions the domain.
std::vector<GoalTemplate> select_zero_shot_templates(const std::vector<GoalTemplate>& source,
                                                     const std::string& target_domain);

// Delexicalized goals of the corpus dialogues in `split` (all splits when
// empty). Dialogues whose goals cannot be delexicalized are skipped.
std::vector<GoalTemplate> templates_from_corpus(const Corpus& corpus, const std::string& split,
                                                std::size_t* skipped = nullptr);

struct FewShotCounts {
  std::size_t gold_target_total = 0;
  std::size_t gold_target_kept = 0;
  std::size_t gold_other = 0;
  std::size_t synthetic = 0;
};

struct FewShotMix {
  Corpus corpus;
  FewShotCounts counts;
};

// Keeps round(ratio * n) of the n gold dialogues tagged with the target
// (seeded choice, original order), all other gold dialogues, then the
// synthetic corpus. Throws ConfigError when ratio is outside [0, 1].
FewShotMix mix_few_shot(const Corpus& gold, const Corpus& synthetic, const std::string& target_domain,
                        double ratio, std::uint64_t seed);

}  // namespace wozsynth
