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

#ifndef MBDTG_TESTS_CLI_RUNNER_H_
#define MBDTG_TESTS_CLI_RUNNER_H_

// Drives the installed command-line tool as a subprocess.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mbdtg/checksum.h"

namespace mbdtg::testing {

struct CliResult {
  int exit_code = -1;
  std::string stderr_text;
};

inline std::string ShellQuote(const std::string &s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs `mbdtg args...` inside `dir` with a fixed manifest timestamp.
inline CliResult RunCli(const std::filesystem::path &dir, const std::vector<std::string> &args) {
  const std::filesystem::path err = dir / ".stderr";
  std::string cmd = "cd " + ShellQuote(dir.string()) + " && SOURCE_DATE_EPOCH=0 " +
                    ShellQuote(MBDTG_CLI);
  for (const auto &a : args) cmd += " " + ShellQuote(a);
  cmd += " 2> " + ShellQuote(err.string());
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = ReadFile(err.string());
  return r;
}

inline std::filesystem::path FreshDir(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mbdtg_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::map<std::string, std::string> Snapshot(const std::filesystem::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name != ".stderr") files[name] = ReadFile(entry.path().string());
  }
  return files;
}

// Every subcommand on small inputs, in dependency order. Fixtures are written
// into `dir`; `data` holds the checked-in test corpora.
inline std::vector<std::vector<std::string>> PipelineCommands(const std::filesystem::path &dir,
                                                              const std::string &data) {
  WriteFile((dir / "tiny.cfg").string(),
            "# small network so the pipeline runs in seconds\n"
            "embed_dim = 8\nhidden_dim = 8\nfeature_dim = 4\nsteps = 4\nbatch_size = 4\n"
            "beam_size = 2\nmax_len = 8\n");
  WriteFile((dir / "tables.jsonl").string(),
            "{\"id\":\"s1\",\"table\":[[\"name\",[\"ada\",\"lovelace\"]]]}\n");
  WriteFile((dir / "parses.conllu").string(),
            "# sent_id = s1\n"
            "1\tAda\t_\tPROPN\t_\t_\t3\tnsubj\t_\t_\n"
            "2\tLovelace\t_\tPROPN\t_\t_\t1\tflat\t_\t_\n"
            "3\twrote\t_\tVERB\t_\t_\t0\troot\t_\t_\n\n");
  const std::string train = data + "/fig2_train.jsonl";
  return {
      {"build-index", "--corpus", train, "--out", "index.bin"},
      {"label", "--corpus", train, "--index", "index.bin", "--out", "labels.txt"},
      {"filter", "--corpus", train, "--index", "index.bin", "--out", "filtered.jsonl"},
      {"synth", "--instances", "5", "--seed", "3", "--out", "synth.jsonl"},
      {"import-conllu", "--conllu", "parses.conllu", "--tables", "tables.jsonl", "--out",
       "imported.jsonl"},
      {"train", "--config", "tiny.cfg", "--corpus", train, "--index", "index.bin", "--threads",
       "2", "--out", "model.ckpt"},
      {"generate", "--config", "tiny.cfg", "--model", "model.ckpt", "--corpus", train, "--out",
       "predictions.tsv"},
      {"evaluate", "--corpus", train, "--index", "index.bin", "--predictions", "predictions.tsv",
       "--out", "report.json"},
      {"sweep", "--config", "tiny.cfg", "--model", "model.ckpt", "--corpus", train, "--index",
       "index.bin", "--out", "sweep.tsv"},
  };
}

}  // namespace mbdtg::testing

#endif  // MBDTG_TESTS_CLI_RUNNER_H_
