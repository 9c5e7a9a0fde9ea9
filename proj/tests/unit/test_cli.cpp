// Copyright 2026 The ConceptLM Authors.
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

#include <doctest.h>

#include <chrono>
#include <fstream>
#include <json.hpp>

#include "clm/cli/config.hpp"
#include "clm/common/error.hpp"
#include "pipeline.hpp"
#include "test_helpers.hpp"

using namespace clm;
using namespace clm::testing;

TEST_CASE("default inference configuration carries the published values") {
  const cli::RunConfig c = cli::RunConfig::from(cli::ConfigValues{});
  CHECK(c.sampler.steps == 40);
  CHECK(c.sampler.sigma_init == 0.6);
  CHECK(c.sampler.guidance_scale == 3.0);
  CHECK(c.sampler.guidance_rescale == 0.7);
  CHECK(c.sampler.epsilon_scaling == 1.00045);
  CHECK(c.pretrain_eval_max_sentences == 1);
  CHECK(c.instruct_max_sentences == 16);
  CHECK(c.eot_threshold == 0.90);
  CHECK(c.segmentation.threshold == 0.02);
  CHECK(c.segmentation.max_len == 256);
  CHECK(c.pretrain.steps == 250000);
  CHECK(c.pretrain.peak_lr == 4e-4);
  CHECK(c.pretrain.warmup == 10000);
  CHECK(c.pretrain.weight_decay == 0.1);
  CHECK(c.pretrain.sentence_budget == 229376);
  CHECK(c.finetune.steps == 20000);
  CHECK(c.finetune.peak_lr == 1e-5);
  CHECK(c.finetune.weight_decay == 0.01);
  CHECK(c.finetune.instance_budget == 512);
  CHECK(c.prefix_eval.min_sentences == 9);
  CHECK(c.prefix_eval.n_docs == 1000);
}

TEST_CASE("shipped default config file equals the built-in defaults") {
  cli::ConfigValues from_file;
  from_file.load_ini(std::filesystem::path(CLM_DATA_DIR).parent_path() / "configs" / "default.ini");
  CHECK(from_file.canonical() == cli::ConfigValues{}.canonical());
  CHECK(from_file.hash() == cli::ConfigValues{}.hash());
  for (const auto& key : cli::config_keys()) CHECK(from_file.get(key.name) == key.default_value);
}

TEST_CASE("configuration validation names the offending key") {
  auto message_for = [](const std::string& assignment) {
    try {
      cli::ConfigValues v;
      v.set(std::string_view(assignment));
      cli::RunConfig::from(v);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidConfig);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message_for("model.bogus=1").find("model.bogus") != std::string::npos);
  CHECK(message_for("model.n_heads=3").find("model") != std::string::npos);
  CHECK(message_for("inference.steps=abc").find("inference.steps") != std::string::npos);
  CHECK(message_for("inference.steps=200").find("inference.steps") != std::string::npos);
  CHECK(message_for("codec.sentinel_table=/does/not/exist.tsv").find("codec.sentinel_table") != std::string::npos);
  CHECK(message_for("inference.instruct_max_sentences=128").find("inference.instruct_max_sentences") !=
        std::string::npos);

  cli::ConfigValues a, b;
  b.set("run.workers", "4");
  CHECK(a.hash() == b.hash());
  b.set("run.seed", "1");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("command line exit codes") {
  const CliRun help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("Subcommands") != std::string::npos);
  CHECK(run_cli({"segment", "--help"}).code == 0);

  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"no-such-command"}).code == 1);
  CHECK(run_cli({"segment", "--bogus"}).code == 1);

  TempDir dir("cli");
  const CliRun missing = run_cli({"segment", "--input", (dir / "absent.jsonl").string(), "--out", "x"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--input") != std::string::npos);

  const CliRun bad_key = run_cli({"segment", "--input", (dir / "absent.jsonl").string(), "--out", "x", "--set",
                                  "segment.nope=1"});
  CHECK(bad_key.code == 1);

  std::ofstream(dir / "broken.jsonl") << "not json\n";
  const CliRun runtime = run_cli({"segment", "--input", (dir / "broken.jsonl").string(), "--out",
                                  (dir / "out.jsonl").string()});
  CHECK(runtime.code == 2);
  CHECK(runtime.err.find("broken.jsonl:1") != std::string::npos);
}

TEST_CASE("toy pipeline smoke run") {
  TempDir dir("smoke");
  const auto start = std::chrono::steady_clock::now();
  const auto steps = run_toy_pipeline(dir.path());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& s : steps) {
    INFO(s.name << ": " << s.result.err);
    CHECK(s.result.code == 0);
  }
  REQUIRE(steps.size() == 8);
  CHECK(seconds < 60.0);

  // Every run reports its config hash and seed.
  for (const auto& s : steps) CHECK(s.result.err.find("config_hash=") != std::string::npos);

  // generate prints sentences then a JSON trailer.
  const std::string& out = steps[5].result.out;
  const std::string trailer = out.substr(out.rfind('\n', out.size() - 2) + 1);
  const auto j = nlohmann::json::parse(trailer);
  CHECK(j.contains("stop_reason"));
  CHECK(j.contains("n_sentences"));
  CHECK(j.contains("seed"));

  // Artifacts carry provenance.
  std::ifstream meta_in(dir / "data" / "normalizer.clmn.meta.json");
  const auto meta = nlohmann::json::parse(meta_in);
  CHECK(meta.contains("config_hash"));
  CHECK(meta.contains("seed"));
  CHECK(meta["version"] == cli::version());

  // Resume mid-run via the CLI.
  const std::string config = (std::filesystem::path(CLM_DATA_DIR).parent_path() / "configs" / "toy.ini").string();
  const std::string data = (dir / "data").string(), run = (dir / "resume").string();
  CHECK(run_cli({"pretrain", "--config", config, "--data", data, "--out", run, "--stop-after", "25"}).code == 0);
  CHECK(run_cli({"pretrain", "--config", config, "--data", data, "--out", run, "--resume"}).code == 0);
  CHECK(read_bytes(dir / "resume" / "final.clmw") == read_bytes(dir / "pretrain" / "final.clmw"));
  const CliRun mismatch = run_cli(
      {"pretrain", "--config", config, "--data", data, "--out", run, "--resume", "--set", "train.pretrain_lr=0.002"});
  CHECK(mismatch.code == 2);

  // Align and report subcommands.
  const CliRun align = run_cli({"align", "--config", config, "--input",
                                (std::filesystem::path(CLM_DATA_DIR) / "toy" / "parallel.jsonl").string(),
                                "--languages", "fra_Latn,deu_Latn", "--out", (dir / "align").string()});
  CHECK(align.code == 0);
  CHECK(std::filesystem::exists(dir / "align" / "report_by_language.csv"));
  CHECK(run_cli({"report", "--config", config, "--input", (dir / "align" / "report.json").string(), "--out",
                 (dir / "report").string()})
            .code == 0);

  // Conversation prompts.
  std::ofstream(dir / "turns.json")
      << R"({"lang": "eng_Latn", "turns": [{"role": "user", "text": "What should I pack for a day hike?"}]})";
  const CliRun chat = run_cli({"generate", "--config", config, "--data", data, "--checkpoint",
                               (dir / "finetune" / "final.clmw").string(), "--prompt", (dir / "turns.json").string()});
  CHECK(chat.code == 0);
}

TEST_CASE("two runs with equal config and seed are bitwise identical") {
  TempDir a("det_a"), b("det_b");
  const auto ra = run_toy_pipeline(a.path());
  const auto rb = run_toy_pipeline(b.path());
  REQUIRE(ra.size() == 8);
  REQUIRE(rb.size() == 8);
  for (const auto& f : deterministic_artifacts()) {
    INFO(f);
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(read_bytes(a / f) == read_bytes(b / f));
  }
  CHECK(ra[5].result.out == rb[5].result.out);

  TempDir c("det_c");
  const auto rc = run_toy_pipeline(c.path(), {"--set", "run.seed=1"});
  REQUIRE(rc.size() == 8);
  CHECK(read_bytes(a / "pretrain/final.clmw") != read_bytes(c / "pretrain/final.clmw"));
}
