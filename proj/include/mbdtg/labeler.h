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

#ifndef MBDTG_LABELER_H_
#define MBDTG_LABELER_H_

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mbdtg/config_file.h"
#include "mbdtg/cooccur.h"
#include "mbdtg/corpus.h"

namespace mbdtg::labeler {

struct LabelerConfig {
  double tau = 0.4;
  long m = 5;  // co-occurrence floor
  std::set<std::string> important_pos = {"NUM", "ADJ", "NOUN", "PROPN"};
  // Matched against the base relation (text before any ':' subtype).
  std::set<std::string> introductory_relations = {
      "acl",   "advcl",  "amod",      "appos",      "ccomp",    "conj",
      "csubj", "iobj",   "list",      "nmod",       "nsubj",    "obj",
      "orphan", "parataxis", "reparandum", "vocative", "xcomp"};

  // Throws Error(kInvalidArgument) when an invariant is violated.
  void Check() const;

  // Reads `tau`, `m`, `important_pos`, `introductory_relations`.
  static LabelerConfig FromConfig(const ConfigFile &config);
  static const std::set<std::string> &ConfigKeys();
};

// A group of tokens sharing one score: a statement root and the tokens whose
// nearest statement-root ancestor (or self) it is.
struct Statement {
  int root_index = 0;
  std::vector<int> member_indices;  // ascending
};

struct TokenAnnotation {
  double score = 0.0;
  int label = 0;  // 1 iff score > tau
  int statement_id = 0;
  bool important = false;
  // The raw score came from the table-membership branch of align().
  bool membership = false;
};

// Counters for conditions the labeler recovers from.
struct Diagnostics {
  long degenerate_pairs = 0;       // align() with M <= m
  long unbalanced_delimiters = 0;  // unmatched parentheses or quotes
  long empty_filtered = 0;         // references filtered to nothing

  Diagnostics &operator+=(const Diagnostics &other);
};

// Alignment of a word with one table row, in [0, 1]. Exactly 1 when the word
// is the row's key or one of its value tokens; otherwise a quadratic ramp of
// the co-occurrence count between the floor m and the row maximum M.
double Align(const std::string &word, const corpus::KeyValuePair &pair,
             const cooccur::CooccurrenceIndex &index, const LabelerConfig &cfg,
             Diagnostics *diagnostics = nullptr);

// Best alignment of an important token over the table; nullopt for tokens
// outside the important POS set. `membership` reports whether the maximum
// came from a direct table match.
std::optional<double> RawScore(int token_index, const corpus::ParsedSentence &sentence,
                               const corpus::EntityTable &table,
                               const cooccur::CooccurrenceIndex &index,
                               const LabelerConfig &cfg, Diagnostics *diagnostics = nullptr,
                               bool *membership = nullptr);

// Partitions the sentence into statements ordered by root index.
std::vector<Statement> SegmentStatements(const corpus::ParsedSentence &sentence,
                                         const LabelerConfig &cfg);

// Broadcasts the mean of the defined raw scores of each statement to all of
// its members; statements without defined scores get 0.
std::vector<double> Normalize(const std::vector<std::optional<double>> &raw_scores,
                              const std::vector<Statement> &statements, size_t sentence_size);

// Commas and CCONJ tokens next to a sub-threshold token take its score (the
// minimum when both neighbours qualify); matched parentheses and quotes take
// the minimum score strictly between them.
std::vector<double> ApplyPunctHeuristics(const std::vector<double> &scores,
                                         const corpus::ParsedSentence &sentence,
                                         const LabelerConfig &cfg,
                                         Diagnostics *diagnostics = nullptr);

std::vector<TokenAnnotation> LabelInstance(const corpus::Instance &inst,
                                           const cooccur::CooccurrenceIndex &index,
                                           const LabelerConfig &cfg,
                                           Diagnostics *diagnostics = nullptr);

// Labels every instance; output order follows input order for any thread count.
std::vector<std::vector<TokenAnnotation>> LabelCorpus(const corpus::Corpus &corpus,
                                                      const cooccur::CooccurrenceIndex &index,
                                                      const LabelerConfig &cfg, int threads = 1,
                                                      Diagnostics *diagnostics = nullptr);

struct FilteredReference {
  std::vector<std::string> tokens;
  std::vector<int> kept_indices;
  bool empty = false;  // every token was removed
};

// Drops label-0 tokens, keeping order.
FilteredReference FilterReference(const corpus::Instance &inst,
                                  const std::vector<TokenAnnotation> &annotations);

// `id tok|score|label ...` with scores at 4 decimals.
std::string FormatLabelLine(const corpus::Instance &inst,
                            const std::vector<TokenAnnotation> &annotations);

}  // namespace mbdtg::labeler

#endif  // MBDTG_LABELER_H_
