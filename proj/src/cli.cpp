// cli.cpp
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

#include "wozsynth/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "wozsynth/corpus_io.hpp"
#include "wozsynth/dst_eval.hpp"
#include "wozsynth/io.hpp"
#include "wozsynth/multiwoz.hpp"
#include "wozsynth/oracle_labeler.hpp"
#include "wozsynth/remote_backend.hpp"
#include "wozsynth/surrogate.hpp"
#include "wozsynth/synthesizer.hpp"
#include "wozsynth/text.hpp"
#include "wozsynth/training.hpp"

#ifndef WOZSYNTH_VERSION
#define WOZSYNTH_VERSION "dev"
#endif

namespace wozsynth {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kBackend: return kExitBackend;
    case ErrorKind::kShortfall: return kExitShortfall;
  }
  return kExitData;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Content fingerprint of an input file or directory (sorted file list).
std::string fingerprint(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    std::uint64_t h = fnv1a64("");
    for (const auto& f : files)
      h = mix64(h ^ fnv1a64(fs::relative(f, path).string()) ^ mix64(fnv1a64(read_file(f))));
    return hex64(h);
  }
  return hex64(fnv1a64(read_file(path)));
}

struct Manifest {
  ojson j;
  explicit Manifest(const std::string& command) {
    j["command"] = command;
    j["version"] = WOZSYNTH_VERSION;
    j["seed"] = 0;
    j["inputs"] = ojson::object();
    j["params"] = ojson::object();
    j["counts"] = ojson::object();
    j["outputs"] = ojson::array();
  }
  void input(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    j["inputs"][role] = {{"path", path}, {"fingerprint", fingerprint(path)}};
  }
  void output(const fs::path& p, const std::string& contents) {
    write_file(p.string(), contents);
    j["outputs"].push_back({{"file", p.filename().string()}, {"fingerprint", hex64(fnv1a64(contents))}});
  }
  void write(const fs::path& dir) const { write_file((dir / "manifest.json").string(), j.dump(2) + "\n"); }
};

Schema load_schema_or_default(const std::string& path) {
  return path.empty() ? default_multiwoz_schema() : load_schema(path);
}

std::vector<double> parse_grid(const std::vector<double>& given, const std::vector<double>& fallback) {
  return given.empty() ? fallback : given;
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string input;
  std::string schema;
  std::string out;
  std::string template_split = "val";
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.input)) throw ConfigError("input directory does not exist: " + a.input);
  if (fs::is_empty(a.input)) throw ConfigError("input directory is empty: " + a.input);
  const Schema schema = load_schema_or_default(a.schema);
  IngestResult r = ingest_multiwoz(a.input, schema);
  const fs::path dir(a.out);
  Manifest m("ingest");
  m.input("multiwoz_dir", a.input);
  m.input("schema", a.schema);
  m.j["params"]["template_split"] = a.template_split;
  m.output(dir / "schema.json", schema_to_json(r.schema));
  m.output(dir / "kb.json", kb_to_json(r.kb));
  m.output(dir / "corpus.json", corpus_to_json(r.corpus));
  std::size_t skipped = 0;
  auto templates = templates_from_corpus(r.corpus, a.template_split, &skipped);
  m.output(dir / "templates.json", templates_to_json(templates));

  ojson counts;
  counts["dialogues"] = r.corpus.size();
  counts["turns"] = r.stats.turns;
  counts["dialogues_per_split"] = r.stats.dialogues_per_split;
  ojson dom = ojson::object();
  for (const auto& [split, per] : r.stats.domain_dialogues) dom[split] = per;
  counts["domain_dialogues"] = std::move(dom);
  counts["goal_pairs_kept"] = r.stats.goal_pairs_kept;
  counts["goal_pairs_dropped"] = r.stats.goal_pairs_dropped;
  counts["ignored_state_values"] = r.stats.ignored_state_values;
  counts["templates"] = templates.size();
  counts["templates_skipped"] = skipped;
  counts["kb_instances"] = r.kb.size();
  m.j["counts"] = std::move(counts);
  m.write(dir);
  out << "ingested " << r.corpus.size() << " dialogues (" << r.stats.turns << " turns), "
      << templates.size() << " templates from split '" << a.template_split << "'\n";
  return kExitOk;
}

// ------------------------------------------------------------ synthesize

struct SynthArgs {
  std::string schema;
  std::string kb;
  std::string templates;
  std::string templates_from;
  std::string template_split = "val";
  std::string out;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  bool surrogate = false;
  std::string backend_url;
  std::string labeler_url;
  std::string target_domain;
  std::vector<double> top_p;
  std::vector<double> temperature;
  int max_tokens = 512;
  int retry_budget = 3;
  std::size_t max_draws = 8;
  int jobs = 0;
};

int cmd_synthesize(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  if (a.surrogate == !a.backend_url.empty())
    throw ConfigError("choose exactly one of --surrogate or --backend-url (or " +
                      std::string(kBackendUrlEnv) + ")");
  if (a.templates.empty() == a.templates_from.empty())
    throw ConfigError("give exactly one of --templates or --templates-from");
  SynthesisJob job;
  job.schema = load_schema_or_default(a.schema);
  job.kb = load_kb(job.schema, a.kb);
  std::vector<GoalTemplate> pool = a.templates.empty()
                                       ? templates_from_corpus(load_corpus(a.templates_from, &job.schema),
                                                               a.template_split)
                                       : load_templates(a.templates);
  if (!a.target_domain.empty()) {
    if (!job.schema.has_domain(a.target_domain))
      throw ConfigError("unknown target domain '" + a.target_domain + "'");
    pool = select_zero_shot_templates(pool, a.target_domain);
    job.target_domain = a.target_domain;
  }
  job.templates = std::move(pool);
  job.target_count = a.n;
  job.seed = a.seed;
  job.top_p_grid = parse_grid(a.top_p, job.top_p_grid);
  job.temperature_grid = parse_grid(a.temperature, job.temperature_grid);
  job.max_tokens = a.max_tokens;
  job.retry_budget = a.retry_budget;
  job.max_draws = a.max_draws;
  job.jobs = a.jobs;
  job.labeler = LabelerConfig::for_schema(job.schema);
  if (!a.target_domain.empty()) job.id_prefix = "synth-" + a.target_domain;

  std::unique_ptr<CollectorBackend> collector;
  std::unique_ptr<LabelerBackend> labeler;
  if (a.surrogate) {
    collector = std::make_unique<SurrogateCollector>(job.schema);
    labeler = std::make_unique<OracleLabeler>(job.schema, job.labeler);
  } else {
    collector = std::make_unique<RemoteCollector>(Endpoint::parse(a.backend_url));
    labeler = std::make_unique<RemoteLabeler>(
        Endpoint::parse(a.labeler_url.empty() ? a.backend_url : a.labeler_url));
  }

  SynthesisResult r = synthesize(job, *collector, *labeler);
  const fs::path dir(a.out);
  Manifest m("synthesize");
  m.j["seed"] = a.seed;
  m.input("schema", a.schema);
  m.input("kb", a.kb);
  m.input("templates", a.templates);
  m.input("templates_from", a.templates_from);
  m.j["params"] = {{"n", a.n},
                   {"backend", a.surrogate ? "surrogate" : "remote"},
                   {"backend_url", a.backend_url},
                   {"target_domain", a.target_domain},
                   {"top_p_grid", job.top_p_grid},
                   {"temperature_grid", job.temperature_grid},
                   {"max_tokens", job.max_tokens},
                   {"retry_budget", job.retry_budget},
                   {"max_draws", job.max_draws},
                   {"template_pool", job.templates.size()}};
  m.output(dir / "corpus.json", corpus_to_json(r.corpus));
  m.output(dir / "turns.jsonl", corpus_to_turn_jsonl(r.corpus));
  m.output(dir / "trade_dials.json", corpus_to_trade_json(r.corpus));
  m.output(dir / "synthesis_report.json", synthesis_report_json(r));
  m.j["counts"] = {{"dialogues", r.stats.dialogues},
                   {"turns", r.stats.turns},
                   {"tokens", r.stats.tokens},
                   {"shortfall", r.shortfall},
                   {"draws", r.draws},
                   {"drop_log_entries", r.drop_log.size()}};
  m.write(dir);
  out << "synthesized " << r.corpus.size() << "/" << a.n << " dialogues, " << r.stats.turns
      << " turns, " << r.stats.tokens << " tokens\n";
  if (r.shortfall > 0) {
    err << "shortfall: " << r.shortfall << " dialogues missing; see synthesis_report.json\n";
    return kExitShortfall;
  }
  return kExitOk;
}

// -------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string pred;
  std::string gold;
  std::string schema;
  std::string out;
  std::optional<double> zero_acc;
  std::optional<double> full_acc;
  std::string zero_report;
  std::string full_report;
  std::string metric = "joint_goal_accuracy";
  bool intrinsic = false;
  bool surrogate = false;
  std::string backend_url;
};

PredictionSet load_gold(const std::string& path, const Schema& schema,
                        std::map<std::string, std::vector<std::string>>* tags) {
  // A native corpus first; anything else is read as JSON lines.
  Corpus c;
  try {
    c = load_corpus(path, &schema);
  } catch (const ParseError&) {
    return load_predictions(path);
  }
  for (const auto& d : c) (*tags)[d.id] = d.domains;
  return prediction_set_from_corpus(c);
}

double read_report_metric(const std::string& path, const std::string& metric) {
  ojson j;
  try {
    j = ojson::parse(read_file(path));
  } catch (const ojson::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains(metric) || !j[metric].is_number())
    throw ParseError(path + ": no numeric '" + metric + "' field");
  return j[metric].get<double>();
}

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
  const Schema schema = load_schema_or_default(a.schema);
  const fs::path dir(a.out);
  Manifest m("evaluate");
  m.input("schema", a.schema);

  std::optional<double> zero = a.zero_acc;
  std::optional<double> full = a.full_acc;
  if (!a.zero_report.empty()) zero = read_report_metric(a.zero_report, a.metric);
  if (!a.full_report.empty()) full = read_report_metric(a.full_report, a.metric);
  if (zero.has_value() != full.has_value())
    throw ConfigError("coverage needs both a zero-shot and a full-data accuracy");
  std::optional<double> coverage;
  if (zero) coverage = zero_shot_coverage(*zero, *full);
  m.input("zero_report", a.zero_report);
  m.input("full_report", a.full_report);

  if (a.intrinsic) {
    if (a.gold.empty()) throw ConfigError("--intrinsic needs --gold");
    if (a.surrogate == !a.backend_url.empty())
      throw ConfigError("--intrinsic needs exactly one of --surrogate or --backend-url");
    Corpus gold = load_corpus(a.gold, &schema);
    const LabelerConfig config = LabelerConfig::for_schema(schema);
    std::unique_ptr<LabelerBackend> backend;
    if (a.surrogate) backend = std::make_unique<OracleLabeler>(schema, config);
    else backend = std::make_unique<RemoteLabeler>(Endpoint::parse(a.backend_url));
    IntrinsicReport r = labeler_intrinsic_eval(gold, schema, *backend, config);
    m.input("gold", a.gold);
    ojson j = {{"joint_goal_accuracy", r.joint_goal_accuracy},
               {"domain_accuracy", r.domain_accuracy},
               {"turns", r.turns}};
    ojson dom = ojson::object();
    for (const auto& [d, s] : r.per_domain)
      dom[d] = {{"joint_goal_accuracy", s.joint_goal_accuracy}, {"turns", s.turns}};
    j["per_domain"] = std::move(dom);
    m.output(dir / "intrinsic_report.json", j.dump(2) + "\n");
    m.j["counts"] = {{"turns", r.turns}};
    m.write(dir);
    char buf[96];
    std::snprintf(buf, sizeof buf, "labeler JGA %.2f%%, domain accuracy %.2f%% over %zu turns\n",
                  100.0 * r.joint_goal_accuracy, 100.0 * r.domain_accuracy, r.turns);
    out << buf;
    return kExitOk;
  }

  if (a.pred.empty() != a.gold.empty()) throw ConfigError("--pred and --gold go together");
  if (a.pred.empty() && !coverage) throw ConfigError("nothing to evaluate");
  if (!a.pred.empty()) {
    std::map<std::string, std::vector<std::string>> tags;
    PredictionSet golds = load_gold(a.gold, schema, &tags);
    PredictionSet preds = load_predictions(a.pred);
    golds.validate();
    preds.validate();
    EvalReport r = evaluate(preds, golds, schema, tags.empty() ? nullptr : &tags);
    m.input("pred", a.pred);
    m.input("gold", a.gold);
    m.output(dir / "report.json", report_to_json(r, coverage));
    m.output(dir / "report.txt", report_to_text(r));
    m.output(dir / "per_slot.csv", per_slot_csv(r));
    m.j["counts"] = {{"dialogues", r.dialogues}, {"turns", r.turns}, {"slots", r.slots}};
    out << report_to_text(r);
  } else {
    ojson j = {{"zero_shot_coverage", *coverage}, {"zero", *zero}, {"full", *full}};
    m.output(dir / "coverage.json", j.dump(2) + "\n");
  }
  if (coverage) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "zero-shot coverage %.1f%%\n", 100.0 * *coverage);
    out << buf;
  }
  m.write(dir);
  return kExitOk;
}

// --------------------------------------------------------- emit-training

struct EmitArgs {
  std::string corpus;
  std::string schema;
  std::string out;
  std::string leave_out;
  std::string split = "train";
  double beta = kDefaultBeta;
};

int cmd_emit_training(const EmitArgs& a, std::ostream& out) {
  const Schema schema = load_schema_or_default(a.schema);
  Corpus corpus = load_corpus(a.corpus, &schema);
  if (!a.split.empty()) {
    Corpus kept;
    for (auto& d : corpus)
      if (d.provenance.split.empty() || d.provenance.split == a.split) kept.push_back(std::move(d));
    corpus = std::move(kept);
  }
  const std::size_t before = corpus.size();
  if (!a.leave_out.empty()) corpus = leave_one_out(corpus, a.leave_out, schema);

  CollectorTraining ct = emit_collector_training(corpus);
  LabelerTraining lt = emit_labeler_training(corpus, schema, LabelerConfig::for_schema(schema), a.beta);
  const fs::path dir(a.out);
  Manifest m("emit-training");
  m.input("corpus", a.corpus);
  m.input("schema", a.schema);
  m.j["params"] = {{"split", a.split}, {"leave_out", a.leave_out}, {"beta", a.beta}};
  m.output(dir / "collector_train.jsonl", ct.jsonl);
  m.output(dir / "labeler_train.jsonl", lt.jsonl);
  m.output(dir / "collector_manifest.json", manifest_json(ct.manifest));
  m.output(dir / "labeler_manifest.json", manifest_json(lt.manifest));
  m.j["counts"] = {{"dialogues_before_filter", before},
                   {"dialogues", corpus.size()},
                   {"collector_records", ct.manifest.dialogues},
                   {"labeler_records", lt.manifest.records}};
  m.write(dir);
  out << "emitted " << ct.manifest.dialogues << " collector and " << lt.manifest.records
      << " labeler records from " << corpus.size() << " dialogues\n";
  return kExitOk;
}

// ------------------------------------------------------------------- mix

struct MixArgs {
  std::string gold;
  std::string synthetic;
  std::string schema;
  std::string out;
  std::string target_domain;
  double ratio = 0.0;
  std::uint64_t seed = 0;
};

int cmd_mix(const MixArgs& a, std::ostream& out) {
  const Schema schema = load_schema_or_default(a.schema);
  Corpus gold = load_corpus(a.gold, &schema);
  Corpus synthetic = a.synthetic.empty() ? Corpus{} : load_corpus(a.synthetic, &schema);
  FewShotMix mix = mix_few_shot(gold, synthetic, a.target_domain, a.ratio, a.seed);
  const fs::path dir(a.out);
  Manifest m("mix");
  m.j["seed"] = a.seed;
  m.input("gold", a.gold);
  m.input("synthetic", a.synthetic);
  m.j["params"] = {{"target_domain", a.target_domain}, {"few_shot_ratio", a.ratio}};
  m.output(dir / "corpus.json", corpus_to_json(mix.corpus));
  m.j["counts"] = {{"gold_target_total", mix.counts.gold_target_total},
                   {"gold_target_kept", mix.counts.gold_target_kept},
                   {"gold_other", mix.counts.gold_other},
                   {"synthetic", mix.counts.synthetic},
                   {"dialogues", mix.corpus.size()}};
  m.write(dir);
  out << "mixed corpus: " << mix.corpus.size() << " dialogues (" << mix.counts.gold_target_kept
      << "/" << mix.counts.gold_target_total << " gold target-domain)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic dialogue generation and DST evaluation toolkit", "wozsynth"};
  app.set_version_flag("--version", WOZSYNTH_VERSION);
  app.set_config("--config", "", "TOML or INI file; command-line flags override it");
  app.require_subcommand(1);

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Convert a MultiWOZ 2.1 directory to native files");
  ingest->add_option("--input", ia.input, "MultiWOZ directory (data.json, *_db.json)")->required();
  ingest->add_option("--schema", ia.schema, "Schema JSON (default: built-in MultiWOZ schema)")
      ->check(CLI::ExistingFile);
  ingest->add_option("--out", ia.out, "Output directory")->required();
  ingest->add_option("--template-split", ia.template_split, "Split whose goals become templates");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Generate and annotate dialogues");
  synth->add_option("--schema", sa.schema)->check(CLI::ExistingFile);
  synth->add_option("--kb", sa.kb, "kb.json or a MultiWOZ DB directory")->required()->check(CLI::ExistingPath);
  synth->add_option("--templates", sa.templates, "Template JSON file")->check(CLI::ExistingFile);
  synth->add_option("--templates-from", sa.templates_from, "Native corpus whose goals become templates")
      ->check(CLI::ExistingFile);
  synth->add_option("--template-split", sa.template_split);
  synth->add_option("--out", sa.out)->required();
  synth->add_option("--seed", sa.seed);
  synth->add_option("--n", sa.n, "Number of dialogues")->required();
  synth->add_flag("--surrogate", sa.surrogate, "Use the in-process surrogate Collector and oracle Labeler");
  synth->add_option("--backend-url", sa.backend_url)->envname(kBackendUrlEnv);
  synth->add_option("--labeler-url", sa.labeler_url, "Scoring service (default: --backend-url)");
  synth->add_option("--target-domain", sa.target_domain, "Zero-shot mode");
  synth->add_option("--top-p", sa.top_p, "top_p grid")->delimiter(',');
  synth->add_option("--temperature", sa.temperature, "Temperature grid")->delimiter(',');
  synth->add_option("--max-tokens", sa.max_tokens);
  synth->add_option("--retry-budget", sa.retry_budget);
  synth->add_option("--max-draws", sa.max_draws);
  synth->add_option("--jobs", sa.jobs, "Worker threads (default: all cores)");

  EvalArgs ea;
  double zero = 0.0;
  double full = 0.0;
  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold states");
  eval->add_option("--pred", ea.pred, "Prediction JSON lines")->check(CLI::ExistingFile);
  eval->add_option("--gold", ea.gold, "Native corpus or JSON lines")->check(CLI::ExistingFile);
  eval->add_option("--schema", ea.schema)->check(CLI::ExistingFile);
  eval->add_option("--out", ea.out)->required();
  auto* zopt = eval->add_option("--zero-acc", zero, "Zero-shot accuracy for coverage");
  auto* fopt = eval->add_option("--full-acc", full, "Full-data accuracy for coverage");
  eval->add_option("--zero-report", ea.zero_report)->check(CLI::ExistingFile);
  eval->add_option("--full-report", ea.full_report)->check(CLI::ExistingFile);
  eval->add_option("--metric", ea.metric, "Report field used for coverage")
      ->check(CLI::IsMember({"joint_goal_accuracy", "slot_accuracy"}));
  eval->add_flag("--intrinsic", ea.intrinsic, "Labeler accuracy on gold dialogues");
  eval->add_flag("--surrogate", ea.surrogate, "Use the oracle Labeler");
  eval->add_option("--backend-url", ea.backend_url)->envname(kBackendUrlEnv);

  EmitArgs ma;
  auto* emit = app.add_subcommand("emit-training", "Write Collector and Labeler training files");
  emit->add_option("--corpus", ma.corpus)->required()->check(CLI::ExistingFile);
  emit->add_option("--schema", ma.schema)->check(CLI::ExistingFile);
  emit->add_option("--out", ma.out)->required();
  emit->add_option("--leave-out", ma.leave_out, "Drop dialogues tagged with this domain");
  emit->add_option("--target-domain", ma.leave_out, "Alias of --leave-out");
  emit->add_option("--split", ma.split, "Only this split (empty: all)");
  emit->add_option("--beta", ma.beta, "Weight of non-None answers");

  MixArgs xa;
  auto* mixc = app.add_subcommand("mix", "Compose a few-shot training corpus");
  mixc->add_option("--gold", xa.gold)->required()->check(CLI::ExistingFile);
  mixc->add_option("--synthetic", xa.synthetic)->check(CLI::ExistingFile);
  mixc->add_option("--schema", xa.schema)->check(CLI::ExistingFile);
  mixc->add_option("--out", xa.out)->required();
  mixc->add_option("--target-domain", xa.target_domain)->required();
  mixc->add_option("--few-shot-ratio", xa.ratio)->required();
  mixc->add_option("--seed", xa.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(ia, out);
    if (synth->parsed()) return cmd_synthesize(sa, out, err);
    if (eval->parsed()) {
      if (zopt->count()) ea.zero_acc = zero;
      if (fopt->count()) ea.full_acc = full;
      return cmd_evaluate(ea, out);
    }
    if (emit->parsed()) return cmd_emit_training(ma, out);
    if (mixc->parsed()) return cmd_mix(xa, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace wozsynth
