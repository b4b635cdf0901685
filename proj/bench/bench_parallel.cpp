// bench_parallel.cpp
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
// Serial reference versus OpenMP kernel for synthesis, the state metrics
// and corpus statistics.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "test_support.hpp"
#include "wozsynth/dst_eval.hpp"
#include "wozsynth/oracle_labeler.hpp"
#include "wozsynth/surrogate.hpp"
#include "wozsynth/synthesizer.hpp"

namespace {

using namespace wozsynth;

struct Fixture {
  Fixture() : job(testing::random_job(2718, 400)), collector(job.schema), labeler(job.schema, job.labeler) {
    corpus = synthesize(job, collector, labeler).corpus;
    golds = prediction_set_from_corpus(corpus);
    preds = golds;
    // Perturb every fifth turn so the metrics do real comparisons.
    std::size_t i = 0;
    for (auto& [key, state] : preds.turns)
      if (i++ % 5 == 0) state["hotel-area"] = "east";
    for (const SlotDef* s : job.schema.informable_slots()) slots.push_back(s->name);
  }
  SynthesisJob job;
  SurrogateCollector collector;
  OracleLabeler labeler;
  Corpus corpus;
  PredictionSet golds, preds;
  std::vector<std::string> slots;
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_SynthesizeSerial(benchmark::State& state) {
  Fixture& f = fixture();
  SynthesisJob job = f.job;
  job.target_count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_serial(job, f.collector, f.labeler));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SynthesizeParallel(benchmark::State& state) {
  Fixture& f = fixture();
  SynthesisJob job = f.job;
  job.target_count = static_cast<std::size_t>(state.range(0));
  job.jobs = omp_get_max_threads();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize(job, f.collector, f.labeler));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_JointGoalSerial(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(joint_goal_accuracy_serial(f.preds, f.golds));
  state.SetItemsProcessed(state.iterations() * f.golds.size());
}

void BM_JointGoalParallel(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(joint_goal_accuracy(f.preds, f.golds));
  state.SetItemsProcessed(state.iterations() * f.golds.size());
}

void BM_SlotAccuracySerial(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(slot_accuracy_serial(f.preds, f.golds, f.slots));
  state.SetItemsProcessed(state.iterations() * f.golds.size());
}

void BM_SlotAccuracyParallel(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(slot_accuracy(f.preds, f.golds, f.slots));
  state.SetItemsProcessed(state.iterations() * f.golds.size());
}

void BM_CorpusStatsSerial(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(corpus_stats_serial(f.corpus));
  state.SetItemsProcessed(state.iterations() * f.corpus.size());
}

void BM_CorpusStatsParallel(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(corpus_stats(f.corpus));
  state.SetItemsProcessed(state.iterations() * f.corpus.size());
}

BENCHMARK(BM_SynthesizeSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesizeParallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JointGoalSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_JointGoalParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SlotAccuracySerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SlotAccuracyParallel)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorpusStatsSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CorpusStatsParallel)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
