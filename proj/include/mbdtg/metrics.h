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

#ifndef MBDTG_METRICS_H_
#define MBDTG_METRICS_H_

#include <string>
#include <vector>

#include "mbdtg/cooccur.h"
#include "mbdtg/corpus.h"
#include "mbdtg/labeler.h"

namespace mbdtg::metrics {

using Tokens = std::vector<std::string>;

struct EvalRecord {
  std::string id;
  Tokens candidate;
  Tokens reference;
  corpus::EntityTable table;
};

enum class BleuSmoothing {
  kNone,
  // Add one to the match and total counts of every order n >= 2, applied
  // only when some order has zero matches.
  kAddOne,
};

// Corpus-level BLEU in [0, 1] with the standard brevity penalty.
double Bleu(const std::vector<EvalRecord> &records, int max_n = 4,
            BleuSmoothing smoothing = BleuSmoothing::kAddOne);

struct ParentScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;  // harmonic mean of the corpus precision and recall
};

// PARENT with word-overlap entailment. Precision and recall are per-record
// means; zero n-gram precisions/recalls and a zero table recall are floored at
// `smoothing`.
ParentScore Parent(const std::vector<EvalRecord> &records, double lambda_mixing = 0.5,
                   double smoothing = 1e-5, int max_n = 4);

// Fraction of output tokens the labeler marks 0. Each output is an instance
// whose reference is the parsed candidate.
double HallucinationRate(const std::vector<corpus::Instance> &outputs,
                         const cooccur::CooccurrenceIndex &index,
                         const labeler::LabelerConfig &cfg);

// Mean token count per output, punctuation included.
double MeanLength(const std::vector<Tokens> &outputs);

bool IsPunctuation(const std::string &token);
// Vowel-group estimate, at least 1.
int CountSyllables(const std::string &word);

// Flesch reading ease; every output is one sentence, punctuation tokens are
// not words.
double Flesch(const std::vector<Tokens> &outputs);

struct MetricReport {
  double bleu = 0.0;
  double parent_precision = 0.0;
  double parent_recall = 0.0;
  double parent_f = 0.0;
  double hallucination_rate = 0.0;
  double mean_length = 0.0;
  double flesch = 0.0;

  std::string ToJson() const;
  std::string ToTsv() const;
};

// Runs every metric. `parsed_outputs[i]` pairs records[i].table with the
// parsed candidate.
MetricReport Evaluate(const std::vector<EvalRecord> &records,
                      const std::vector<corpus::Instance> &parsed_outputs,
                      const cooccur::CooccurrenceIndex &index,
                      const labeler::LabelerConfig &cfg);

}  // namespace mbdtg::metrics

#endif  // MBDTG_METRICS_H_
