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

#ifndef MBDTG_MBD_GENERATE_H_
#define MBDTG_MBD_GENERATE_H_

#include <string>
#include <vector>

#include "mbdtg/corpus.h"
#include "mbdtg/mbd/model.h"

namespace mbdtg::mbd {

struct GenerateOptions {
  int beam_size = 10;
  int max_len = 60;  // generated tokens, <eos> excluded
};

struct Generation {
  std::vector<std::string> tokens;  // without <eos>
  double score = 0.0;               // log-probability divided by length
  bool finished = true;             // false when no hypothesis reached <eos>
};

// Beam search with the same weights at every step. Hypotheses are ranked by
// cumulative log-probability during the search and by length-normalized
// log-probability (length counts <eos>) among finished ones.
Generation Generate(const Model &model, const corpus::EntityTable &table,
                    const BranchWeights &weights, const GenerateOptions &options);

// Argmax decoding; lowest extended id wins ties.
Generation GreedyDecode(const Model &model, const corpus::EntityTable &table,
                        const BranchWeights &weights, int max_len);

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_GENERATE_H_
