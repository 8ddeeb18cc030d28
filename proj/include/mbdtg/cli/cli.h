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

#ifndef MBDTG_CLI_CLI_H_
#define MBDTG_CLI_CLI_H_

#include <map>
#include <string>
#include <vector>

namespace mbdtg::cli {

// Written next to every command output as `<out>.manifest.json`. Everything
// except `timestamp` is a pure function of the command line and inputs.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;  // fully resolved
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::vector<std::string> outputs;
  std::string version;
  long seed = 0;
  std::string timestamp;  // UTC, ISO 8601

  std::string ToJson() const;
};

// Parses arguments, runs one subcommand and returns the process exit code.
// Failures print a single `mbdtg: error[<code>]: <message>` line to stderr.
int Run(int argc, char **argv);

}  // namespace mbdtg::cli

#endif  // MBDTG_CLI_CLI_H_
