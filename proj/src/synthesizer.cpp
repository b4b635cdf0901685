// synthesizer.cpp
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

#include "wozsynth/synthesizer.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "json.hpp"
#include "wozsynth/errors.hpp"
#include "wozsynth/rng.hpp"
#include "wozsynth/state_candidate.hpp"
#include "wozsynth/text.hpp"

namespace wozsynth {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kJobLevel = static_cast<std::size_t>(-1);

std::string dialogue_id(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return prefix + "-" + buf;
}

struct Slot {
  std::optional<AnnotatedDialogue> dialogue;
  std::vector<DropRecord> log;
  std::size_t draws = 0;
  std::exception_ptr error;
};

void run_index(const SynthesisJob& job, const std::vector<const GoalTemplate*>& pool,
               std::size_t i, const CollectorBackend& collector, const LabelerBackend& labeler,
               Slot& slot) {
  const std::uint64_t base = derive_seed(job.seed, {static_cast<std::uint64_t>(i)});
  for (std::size_t k = 0; k < job.max_draws; ++k) {
    ++slot.draws;
    slot.dialogue = synthesize_draw(job, pool, derive_seed(base, {static_cast<std::uint64_t>(k)}),
                                    i, k, collector, labeler, slot.log);
    if (slot.dialogue) return;
  }
}

SynthesisResult assemble(const SynthesisJob& job, std::vector<Slot>& slots,
                         std::vector<std::string> skipped) {
  for (const auto& s : slots)
    if (s.error) std::rethrow_exception(s.error);
  SynthesisResult r;
  r.requested = job.target_count;
  r.skipped_templates = std::move(skipped);
  for (const auto& id : r.skipped_templates)
    r.drop_log.push_back({kJobLevel, 0, id, "template skipped: unsatisfiable under the KB"});
  for (auto& s : slots) {
    r.draws += s.draws;
    for (auto& e : s.log) r.drop_log.push_back(std::move(e));
    if (s.dialogue) r.corpus.push_back(std::move(*s.dialogue));
    else ++r.shortfall;
  }
  r.stats = corpus_stats_serial(r.corpus);
  return r;
}

std::vector<const GoalTemplate*> prepare(const SynthesisJob& job, std::vector<std::string>& skipped) {
  job.validate();
  auto pool = usable_templates(job, skipped);
  if (pool.empty()) throw UnsatisfiableError("no template in the pool is satisfiable under the KB");
  return pool;
}

}  // namespace

void SynthesisJob::validate() const {
  if (target_count == 0) throw ConfigError("target count must be at least 1");
  if (templates.empty()) throw ConfigError("template pool is empty");
  if (top_p_grid.empty() || temperature_grid.empty())
    throw ConfigError("generation parameter grids must be non-empty");
  for (double p : top_p_grid)
    GenerationParams{p, temperature_grid.front(), max_tokens, 0}.validate();
  for (double t : temperature_grid) GenerationParams{top_p_grid.front(), t, max_tokens, 0}.validate();
  if (retry_budget < 0) throw ConfigError("retry budget must be non-negative");
  if (max_draws == 0) throw ConfigError("max draws must be at least 1");
  if (labeler.domain_options.empty()) throw ConfigError("no active-domain options configured");
  for (const auto& t : templates) {
    try {
      validate_template(t, schema);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    if (target_domain &&
        std::find(t.domains.begin(), t.domains.end(), *target_domain) == t.domains.end())
      throw ConfigError("zero-shot pool template '" + t.id + "' does not contain domain '" +
                        *target_domain + "'");
  }
}

std::vector<const GoalTemplate*> usable_templates(const SynthesisJob& job,
                                                  std::vector<std::string>& skipped) {
  std::vector<const GoalTemplate*> out;
  for (const auto& t : job.templates) {
    Rng rng(derive_seed(job.seed, {fnv1a64(t.id), 0x5c4eeULL}));
    try {
      (void)sample_api_results(t, job.kb, rng, job.sampling);
      out.push_back(&t);
    } catch (const UnsatisfiableError&) {
      skipped.push_back(t.id);
    } catch (const ValidationError&) {
      skipped.push_back(t.id);
    }
  }
  return out;
}

std::optional<AnnotatedDialogue> synthesize_draw(const SynthesisJob& job,
                                                 const std::vector<const GoalTemplate*>& pool,
                                                 std::uint64_t draw_seed, std::size_t index,
                                                 std::size_t draw, const CollectorBackend& collector,
                                                 const LabelerBackend& labeler,
                                                 std::vector<DropRecord>& log) {
  Rng rng(draw_seed);
  const GoalTemplate& tmpl = *pool[rng.uniform_index(pool.size())];
  auto drop = [&](const std::string& reason) { log.push_back({index, draw, tmpl.id, reason}); };
  try {
    APICallResultSet api = sample_api_results(tmpl, job.kb, rng, job.sampling);
    GoalInstruction goal = instantiate(tmpl, api, job.schema, rng, job.pools);
    CollectorInput input = serialize_input(goal, api);

    GenerationParams params;
    params.top_p = job.top_p_grid[rng.uniform_index(job.top_p_grid.size())];
    params.temperature = job.temperature_grid[rng.uniform_index(job.temperature_grid.size())];
    params.max_tokens = job.max_tokens;
    params.seed = rng.next();

    GenerationOutcome outcome = generate_with_retry(collector, input, params, job.retry_budget);
    for (std::size_t a = 0; a < outcome.failures.size(); ++a)
      drop("generation attempt " + std::to_string(a + 1) + " failed: " + outcome.failures[a]);
    if (!outcome.dialogue) {
      drop("retry budget exhausted");
      return std::nullopt;
    }
    if (outcome.truncated_trailing_system) drop("kept: trailing system turn truncated");

    StateCandidateSet cands = build_candidates(goal, api, job.schema);
    DialogueAnnotation ann = annotate_dialogue(*outcome.dialogue, cands, job.schema, labeler, job.labeler);

    AnnotatedDialogue d;
    d.id = dialogue_id(job.id_prefix, index);
    d.domains = tmpl.domains;
    d.dialogue = std::move(*outcome.dialogue);
    d.annotations = std::move(ann.turns);
    d.goal = std::move(goal);
    d.api = std::move(api);
    d.candidates = std::move(cands);
    d.provenance.source = "synthesized";
    d.provenance.template_id = tmpl.id;
    d.provenance.seed = draw_seed;
    d.provenance.generation_seed = outcome.seed;
    d.provenance.top_p = params.top_p;
    d.provenance.temperature = params.temperature;
    d.provenance.max_tokens = params.max_tokens;
    d.provenance.attempts = outcome.attempts;
    return d;
  } catch (const ProtocolError&) {
    throw;
  } catch (const UnsatisfiableError& e) {
    drop(std::string("unsatisfiable: ") + e.what());
  } catch (const ValidationError& e) {
    drop(std::string("invalid draw: ") + e.what());
  } catch (const MalformedGenerationError& e) {
    drop(std::string("malformed generation: ") + e.what());
  } catch (const BackendError& e) {
    drop(std::string("backend: ") + e.what());
  }
  return std::nullopt;
}

SynthesisResult synthesize(const SynthesisJob& job, const CollectorBackend& collector,
                           const LabelerBackend& labeler) {
  std::vector<std::string> skipped;
  const auto pool = prepare(job, skipped);
  std::vector<Slot> slots(job.target_count);
  const int threads = job.jobs > 0 ? job.jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(job.target_count);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Slot& s = slots[static_cast<std::size_t>(i)];
    try {
      run_index(job, pool, static_cast<std::size_t>(i), collector, labeler, s);
    } catch (...) {
      s.error = std::current_exception();
    }
  }
  return assemble(job, slots, std::move(skipped));
}

SynthesisResult synthesize_serial(const SynthesisJob& job, const CollectorBackend& collector,
                                  const LabelerBackend& labeler) {
  std::vector<std::string> skipped;
  const auto pool = prepare(job, skipped);
  std::vector<Slot> slots(job.target_count);
  for (std::size_t i = 0; i < job.target_count; ++i) run_index(job, pool, i, collector, labeler, slots[i]);
  return assemble(job, slots, std::move(skipped));
}

void require_complete(const SynthesisResult& result) {
  if (result.shortfall > 0)
    throw ShortfallError("synthesized " + std::to_string(result.corpus.size()) + " of " +
                             std::to_string(result.requested) + " dialogues",
                         result.shortfall);
}

std::string synthesis_report_json(const SynthesisResult& result) {
  ojson j;
  j["requested"] = result.requested;
  j["produced"] = result.corpus.size();
  j["shortfall"] = result.shortfall;
  j["draws"] = result.draws;
  j["stats"] = {{"dialogues", result.stats.dialogues},
                {"turns", result.stats.turns},
                {"tokens", result.stats.tokens}};
  j["skipped_templates"] = result.skipped_templates;
  ojson log = ojson::array();
  for (const auto& e : result.drop_log) {
    ojson rec;
    if (e.dialogue_index == kJobLevel) rec["dialogue_index"] = nullptr;
    else rec["dialogue_index"] = e.dialogue_index;
    rec["draw"] = e.draw;
    rec["template_id"] = e.template_id;
    rec["reason"] = e.reason;
    log.push_back(std::move(rec));
  }
  j["drop_log"] = std::move(log);
  return j.dump(2) + "\n";
}

Corpus leave_one_out(const Corpus& corpus, const std::string& target_domain, const Schema& schema) {
  bool known = schema.has_domain(target_domain);
  for (std::size_t i = 0; !known && i < corpus.size(); ++i) known = corpus[i].has_domain(target_domain);
  if (!known) throw ValidationError("leave-one-out: unknown domain '" + target_domain + "'");
  Corpus out;
  for (const auto& d : corpus)
    if (!d.has_domain(target_domain)) out.push_back(d);
  return out;
}

std::vector<GoalTemplate> select_zero_shot_templates(const std::vector<GoalTemplate>& source,
                                                     const std::string& target_domain) {
  std::vector<GoalTemplate> out;
  for (const auto& t : source)
    if (std::find(t.domains.begin(), t.domains.end(), target_domain) != t.domains.end())
      out.push_back(t);
  if (out.empty())
    throw ConfigError("no goal template contains domain '" + target_domain +
                      "'; zero-shot synthesis is impossible");
  return out;
}

std::vector<GoalTemplate> templates_from_corpus(const Corpus& corpus, const std::string& split,
                                                std::size_t* skipped) {
  std::vector<GoalTemplate> out;
  std::size_t skip = 0;
  for (const auto& d : corpus) {
    if (!split.empty() && d.provenance.split != split) continue;
    if (!d.goal || d.goal->explicit_pairs.empty() || d.goal->domains.empty()) {
      ++skip;
      continue;
    }
    try {
      GoalTemplate t = delexicalize(*d.goal);
      t.id = d.id;
      out.push_back(std::move(t));
    } catch (const Error&) {
      ++skip;
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

FewShotMix mix_few_shot(const Corpus& gold, const Corpus& synthetic, const std::string& target_domain,
                        double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw ConfigError("few-shot ratio must lie in [0, 1], got " + std::to_string(ratio));
  std::vector<std::size_t> target;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].has_domain(target_domain)) target.push_back(i);
  const auto keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(target.size())));
  Rng rng(derive_seed(seed, {fnv1a64(target_domain)}));
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.uniform_index(target.size() - i);
    std::swap(target[i], target[j]);
  }
  std::vector<bool> kept(gold.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[target[i]] = true;

  FewShotMix mix;
  mix.counts.gold_target_total = target.size();
  mix.counts.gold_target_kept = keep;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].has_domain(target_domain)) {
      if (kept[i]) mix.corpus.push_back(gold[i]);
    } else {
      mix.corpus.push_back(gold[i]);
      ++mix.counts.gold_other;
    }
  }
  mix.corpus.insert(mix.corpus.end(), synthetic.begin(), synthetic.end());
  mix.counts.synthetic = synthetic.size();
  return mix;
}

}  // namespace wozsynth
