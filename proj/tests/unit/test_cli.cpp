// test_cli.cpp
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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "fake_service.hpp"
#include "json.hpp"
#include "test_support.hpp"
#include "wozsynth/cli.hpp"
#include "wozsynth/io.hpp"

namespace wozsynth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "wozsynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("wozsynth_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

// Ingests the fixture once per test binary.
const std::string& ingested_dir() {
  static const std::string dir = [] {
    const std::string d = scratch("ingest");
    CliRun r = run({"ingest", "--input", testing::fixture_dir(), "--out", d});
    if (r.code != 0) throw std::runtime_error("ingest failed: " + r.err);
    return d;
  }();
  return dir;
}

TEST(Cli, VersionAndUsage) {
  EXPECT_EQ(run({"--version"}).code, kExitOk);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"synthesize", "--bogus"}).code, kExitConfig);
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
}

TEST(Cli, IngestWritesNativeFiles) {
  const std::string d = ingested_dir();
  for (const char* f : {"schema.json", "kb.json", "corpus.json", "templates.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(fs::path(d) / f)) << f;
  EXPECT_EQ(run({"ingest", "--input", "/nonexistent/dir", "--out", scratch("bad_ingest")}).code,
            kExitConfig);
}

TEST(Cli, SynthesizeEvaluateRoundTrip) {
  const std::string in = ingested_dir();
  const std::string out = scratch("synth");
  CliRun s = run({"synthesize", "--surrogate", "--kb", in + "/kb.json", "--templates",
               in + "/templates.json", "--out", out, "--n", "5", "--seed", "7", "--jobs", "2"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const std::string eval_dir = scratch("eval");
  CliRun e = run({"evaluate", "--pred", out + "/turns.jsonl", "--gold", out + "/corpus.json", "--out",
               eval_dir});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  json rep = json::parse(read_file(eval_dir + "/report.json"));
  EXPECT_DOUBLE_EQ(rep["joint_goal_accuracy"].get<double>(), 1.0);

  // Same seed gives byte-identical output.
  const std::string again = scratch("synth_again");
  ASSERT_EQ(run({"synthesize", "--surrogate", "--kb", in + "/kb.json", "--templates",
                 in + "/templates.json", "--out", again, "--n", "5", "--seed", "7"})
                .code,
            kExitOk);
  EXPECT_EQ(read_file(out + "/corpus.json"), read_file(again + "/corpus.json"));
}

TEST(Cli, SynthesizeConfigErrors) {
  const std::string in = ingested_dir();
  const std::string out = scratch("synth_bad");
  const std::vector<std::string> base = {"synthesize", "--kb", in + "/kb.json", "--templates",
                                         in + "/templates.json", "--out", out};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a).code;
  };
  EXPECT_EQ(with({"--surrogate", "--n", "0"}), kExitConfig);
  EXPECT_EQ(with({"--n", "3"}), kExitConfig);  // no backend chosen
  EXPECT_EQ(with({"--surrogate", "--n", "3", "--top-p", "1.5"}), kExitConfig);
  EXPECT_EQ(with({"--surrogate", "--n", "3", "--target-domain", "spaceport"}), kExitConfig);
}

TEST(Cli, EvaluateKeyMismatchIsDataError) {
  const std::string in = ingested_dir();
  const std::string pred = scratch("pred") + "/pred.jsonl";
  write_file(pred, R"({"dialogue_id": "nope", "turn_idx": 1, "state": {}})" "\n");
  CliRun r = run({"evaluate", "--pred", pred, "--gold", in + "/corpus.json", "--out", scratch("eval_bad")});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CoverageOnly) {
  CliRun r = run({"evaluate", "--zero-acc", "42.0", "--full-acc", "61.8", "--out", scratch("cov")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("68.0%"), std::string::npos) << r.out;
  EXPECT_EQ(run({"evaluate", "--zero-acc", "42.0", "--out", scratch("cov2")}).code, kExitConfig);
}

TEST(Cli, EmitTrainingLeaveOut) {
  const std::string in = ingested_dir();
  const std::string out = scratch("emit");
  CliRun r = run({"emit-training", "--corpus", in + "/corpus.json", "--out", out, "--split", "",
               "--leave-out", "hotel"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json m = json::parse(read_file(out + "/collector_manifest.json"));
  EXPECT_EQ(m["dialogues"], 2);  // MUL0002 carries the hotel tag
  std::istringstream lines(read_file(out + "/labeler_train.jsonl"));
  std::string line;
  while (std::getline(lines, line)) EXPECT_EQ(line.find("MUL0002"), std::string::npos);
}

TEST(Cli, MixCounts) {
  const std::string in = ingested_dir();
  const std::string out = scratch("mix");
  CliRun r = run({"mix", "--gold", in + "/corpus.json", "--out", out, "--target-domain", "taxi",
               "--few-shot-ratio", "1.0"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json m = json::parse(read_file(out + "/manifest.json"));
  EXPECT_EQ(m["counts"]["dialogues"], 3);
}

TEST(Cli, BackendFailures) {
  const std::string in = ingested_dir();
  testing::FakeModelService service;
  // Unknown routes answer 404, which is a protocol error.
  CliRun bad = run({"synthesize", "--backend-url", service.url() + "/missing", "--kb", in + "/kb.json",
                 "--templates", in + "/templates.json", "--out", scratch("remote_404"), "--n", "2"});
  EXPECT_EQ(bad.code, kExitBackend) << bad.err;
  // A refused connection is retryable; the draws run out and the run reports a shortfall.
  CliRun refused = run({"synthesize", "--backend-url", "http://127.0.0.1:1", "--kb", in + "/kb.json",
                     "--templates", in + "/templates.json", "--out", scratch("remote_refused"),
                     "--n", "2", "--max-draws", "1", "--retry-budget", "0"});
  EXPECT_EQ(refused.code, kExitShortfall) << refused.err;
  CliRun ok = run({"synthesize", "--backend-url", service.url(), "--kb", in + "/kb.json", "--templates",
                in + "/templates.json", "--out", scratch("remote_ok"), "--n", "2"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
}

}  // namespace
}  // namespace wozsynth
