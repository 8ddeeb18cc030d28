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

#ifndef MBDTG_TESTS_TEST_UTIL_H_
#define MBDTG_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mbdtg/corpus.h"

namespace mbdtg::testing {

inline int Uniform(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
const T &Pick(std::mt19937_64 &rng, const std::vector<T> &items) {
  return items[Uniform(rng, 0, static_cast<int>(items.size()) - 1)];
}

inline std::vector<std::string> RandomTokens(std::mt19937_64 &rng,
                                             const std::vector<std::string> &vocab, int min_len,
                                             int max_len) {
  std::vector<std::string> out(Uniform(rng, min_len, max_len));
  for (auto &t : out) t = Pick(rng, vocab);
  return out;
}

inline corpus::EntityTable RandomTable(std::mt19937_64 &rng, const std::vector<std::string> &vocab,
                                       int max_pairs) {
  static const std::vector<std::string> kKeys = {"name", "team", "born", "club", "role"};
  corpus::EntityTable table;
  const int pairs = Uniform(rng, 1, max_pairs);
  for (int p = 0; p < pairs; ++p) {
    table.pairs.push_back({Pick(rng, kKeys), RandomTokens(rng, vocab, 1, 3)});
  }
  return table;
}

// A random dependency tree: nodes are attached in a random order, each to an
// already attached node, so the result is acyclic with a single root.
inline corpus::ParsedSentence RandomTree(std::mt19937_64 &rng,
                                         const std::vector<std::string> &vocab, int max_len) {
  static const std::vector<std::string> kPos = {"NOUN", "PROPN", "NUM",  "ADJ",   "VERB",
                                                "DET",  "ADP",   "AUX",  "PUNCT", "CCONJ"};
  static const std::vector<std::string> kRelations = {
      "nsubj", "obj",  "amod", "acl:relcl", "appos", "conj", "det",  "case",
      "punct", "flat", "cop",  "nmod:poss", "obl",   "cc",   "compound"};
  const int n = Uniform(rng, 1, max_len);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  corpus::ParsedSentence sentence;
  sentence.tokens.resize(n);
  for (int k = 0; k < n; ++k) {
    auto &tok = sentence.tokens[order[k]];
    tok.surface = Pick(rng, vocab);
    tok.pos = Pick(rng, kPos);
    if (k == 0) {
      tok.head = corpus::kRoot;
      tok.deprel = "root";
    } else {
      tok.head = order[Uniform(rng, 0, k - 1)];
      tok.deprel = Pick(rng, kRelations);
    }
  }
  return sentence;
}

inline corpus::Corpus RandomCorpus(std::mt19937_64 &rng, const std::vector<std::string> &vocab,
                                   int instances, int max_len, int max_pairs) {
  corpus::Corpus c;
  for (int i = 0; i < instances; ++i) {
    c.instances.push_back(corpus::Instance{"r" + std::to_string(i), RandomTable(rng, vocab, max_pairs),
                                           RandomTree(rng, vocab, max_len)});
  }
  return c;
}

}  // namespace mbdtg::testing

#endif  // MBDTG_TESTS_TEST_UTIL_H_
