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

#ifndef MBDTG_SYNTHETIC_H_
#define MBDTG_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "mbdtg/corpus.h"

namespace mbdtg::corpus {

// Biography-like toy corpus with gold parses and planted unsupported spans:
// a parenthetical birth date (acl statement) and a nationality adjective
// (amod statement), neither of which is ever present in the table.
struct SyntheticOptions {
  int instances = 50;
  uint64_t seed = 7;
  double birth_probability = 0.75;
  double nationality_probability = 0.75;
};

struct SyntheticCorpus {
  Corpus corpus;
  // planted[i][t] is true when token t of instance i is unsupported.
  std::vector<std::vector<bool>> planted;

  double PlantedFraction() const;
};

SyntheticCorpus MakeSyntheticCorpus(const SyntheticOptions &options);

}  // namespace mbdtg::corpus

#endif  // MBDTG_SYNTHETIC_H_
