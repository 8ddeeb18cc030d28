// Copyright 2026 The mbdtg Authors.
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

#include <string>

#include "cli_runner.h"
#include "doctest.h"
#include "mbdtg/checksum.h"
#include "mbdtg/cli/cli.h"
#include "json.hpp"

namespace mbdtg::testing {
namespace {

const std::string kData = MBDTG_TEST_DATA;

TEST_CASE("missing inputs exit with the not-found code") {
  const auto dir = FreshDir("cli_missing");
  const CliResult r = RunCli(dir, {"build-index", "--corpus", "absent.jsonl", "--out", "i.bin"});
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("mbdtg: error[not_found]: no such input: absent.jsonl") !=
        std::string::npos);
  CHECK(!std::filesystem::exists(dir / "i.bin"));
}

TEST_CASE("bad arguments and configuration are rejected") {
  const auto dir = FreshDir("cli_bad");
  WriteFile((dir / "bad.cfg").string(), "colour = blue\n");
  const CliResult unknown = RunCli(dir, {"build-index", "--config", "bad.cfg", "--corpus",
                                         kData + "/fig2_train.jsonl", "--out", "i.bin"});
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.stderr_text.find("colour") != std::string::npos);
  CHECK(RunCli(dir, {"build-index", "--corpus", "x"}).exit_code != 0);  // --out missing
  CHECK(RunCli(dir, {"no-such-command"}).exit_code != 0);
}

TEST_CASE("label reproduces the golden annotation of the worked example") {
  const auto dir = FreshDir("cli_label");
  const std::string train = kData + "/fig2_train.jsonl";
  REQUIRE(RunCli(dir, {"build-index", "--corpus", train, "--out", "index.bin"}).exit_code == 0);
  REQUIRE(RunCli(dir, {"label", "--corpus", kData + "/fig2_instance.jsonl", "--index",
                       "index.bin", "--out", "labels.txt"})
              .exit_code == 0);
  CHECK(ReadFile((dir / "labels.txt").string()) == ReadFile(kData + "/fig2_labels.golden"));
  const auto manifest =
      nlohmann::json::parse(ReadFile((dir / "labels.txt.manifest.json").string()));
  CHECK(manifest["command"] == "label");
  CHECK(manifest["config"]["tau"] == "0.40000000000000002");
  CHECK(manifest["inputs"]["index.bin"] == FileSha256Hex((dir / "index.bin").string()));
  CHECK(manifest["timestamp"] == "1970-01-01T00:00:00Z");
}

TEST_CASE("every command is reproducible byte for byte") {
  const auto dir = FreshDir("cli_repro");
  const auto commands = PipelineCommands(dir, kData);
  for (const auto &args : commands) {
    const CliResult r = RunCli(dir, args);
    INFO(args[0] << ": " << r.stderr_text);
    REQUIRE(r.exit_code == 0);
  }
  const auto first = Snapshot(dir);
  for (const auto &args : commands) REQUIRE(RunCli(dir, args).exit_code == 0);
  const auto second = Snapshot(dir);
  CHECK(first.size() == second.size());
  for (const auto &[name, bytes] : first) {
    INFO(name);
    CHECK(second.at(name) == bytes);
  }
  CHECK(first.count("model.ckpt.loss.tsv") == 1);
  CHECK(first.count("report.json.tsv") == 1);
  const std::string sweep = first.at("sweep.tsv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 11);
  CHECK(sweep.rfind("weights\tbleu\tparent_precision\t", 0) == 0);
}

TEST_CASE("references scored against themselves") {
  const auto dir = FreshDir("cli_self");
  // Every reference token is a table value, so PARENT is perfect.
  WriteFile((dir / "refs.jsonl").string(),
            R"({"id":"a","table":[["name",["ada","lovelace"]],["born",["1815"]]],)"
            R"("reference":[["ada","PROPN",0,"root"],["lovelace","PROPN",1,"flat"],)"
            R"(["1815","NUM",1,"nmod"],["ada","PROPN",1,"appos"]]})"
            "\n");
  WriteFile((dir / "preds.tsv").string(), "a\tada lovelace 1815 ada\n");
  REQUIRE(RunCli(dir, {"build-index", "--corpus", "refs.jsonl", "--out", "index.bin"})
              .exit_code == 0);
  const CliResult r = RunCli(dir, {"evaluate", "--corpus", "refs.jsonl", "--index", "index.bin",
                                   "--predictions", "preds.tsv", "--out", "report.json"});
  REQUIRE(r.exit_code == 0);
  const auto report = nlohmann::json::parse(ReadFile((dir / "report.json").string()));
  CHECK(report["parent_f"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report["bleu"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report["hallucination_rate"].get<double>() == 0.0);

  WriteFile((dir / "short.tsv").string(), "b\tada\n");
  CHECK(RunCli(dir, {"evaluate", "--corpus", "refs.jsonl", "--index", "index.bin",
                     "--predictions", "short.tsv", "--out", "r2.json"})
            .exit_code != 0);
}

TEST_CASE("manifest json is stable") {
  cli::RunManifest m;
  m.command = "synth";
  m.version = "0.1.0";
  m.seed = 3;
  m.config["instances"] = "5";
  m.outputs = {"a"};
  m.timestamp = "1970-01-01T00:00:00Z";
  const auto j = nlohmann::json::parse(m.ToJson());
  CHECK(j["seed"] == 3);
  CHECK(j["outputs"][0] == "a");
  CHECK(m.ToJson() == m.ToJson());
}

}  // namespace
}  // namespace mbdtg::testing
