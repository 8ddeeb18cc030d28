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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "mbdtg/error.h"
#include "mbdtg/metrics.h"

namespace mbdtg::metrics {
namespace {

using Counts = std::map<Tokens, int>;

Counts NgramCounts(const Tokens &tokens, int n) {
  Counts counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

// Fraction of the n-gram's tokens found among the table values.
double Entailment(const Tokens &gram, const std::set<std::string> &table_values) {
  int overlap = 0;
  for (const auto &tok : gram) overlap += table_values.count(tok) > 0 ? 1 : 0;
  return static_cast<double>(overlap) / static_cast<double>(gram.size());
}

struct RecordScore {
  double precision;
  double recall;
};

RecordScore ScoreRecord(const EvalRecord &record, double lambda_mixing, double smoothing,
                        int max_n) {
  std::set<std::string> table_values;
  for (const auto &pair : record.table.pairs) {
    table_values.insert(pair.value_tokens.begin(), pair.value_tokens.end());
  }

  std::vector<double> precisions, recalls;
  for (int n = 1; n <= max_n; ++n) {
    const Counts candidate = NgramCounts(record.candidate, n);
    const Counts reference = NgramCounts(record.reference, n);

    double numerator = 0.0, denominator = 0.0;
    for (const auto &[gram, count] : candidate) {
      auto it = reference.find(gram);
      const double in_reference =
          std::min(1.0, static_cast<double>(it == reference.end() ? 0 : it->second) / count);
      denominator += count;
      numerator += count * (in_reference + (1.0 - in_reference) * Entailment(gram, table_values));
    }
    precisions.push_back(denominator == 0.0 ? 0.0 : numerator / denominator);

    numerator = 0.0;
    denominator = 0.0;
    for (const auto &[gram, count] : reference) {
      auto it = candidate.find(gram);
      const double in_candidate =
          std::min(1.0, static_cast<double>(it == candidate.end() ? 0 : it->second) / count);
      const double weight = Entailment(gram, table_values);
      denominator += count * weight;
      numerator += count * weight * in_candidate;
    }
    recalls.push_back(denominator == 0.0 ? 1.0 : numerator / denominator);
  }

  double log_precision = 0.0, log_recall = 0.0;
  for (int n = 0; n < max_n; ++n) {
    log_precision += std::log(precisions[n] == 0.0 ? smoothing : precisions[n]) / max_n;
    log_recall += std::log(recalls[n] == 0.0 ? smoothing : recalls[n]) / max_n;
  }
  const double reference_recall = std::exp(log_recall);

  const std::set<std::string> candidate_tokens(record.candidate.begin(), record.candidate.end());
  double table_recall = 0.0;
  for (const auto &pair : record.table.pairs) {
    int mentioned = 0;
    for (const auto &tok : pair.value_tokens) mentioned += candidate_tokens.count(tok) > 0 ? 1 : 0;
    table_recall += static_cast<double>(mentioned) / pair.value_tokens.size();
  }
  table_recall /= static_cast<double>(record.table.pairs.size());
  if (table_recall == 0.0) table_recall = smoothing;

  const double recall = std::exp((1.0 - lambda_mixing) * std::log(reference_recall) +
                                 lambda_mixing * std::log(table_recall));
  return {std::exp(log_precision), recall};
}

}  // namespace

ParentScore Parent(const std::vector<EvalRecord> &records, double lambda_mixing,
                   double smoothing, int max_n) {
  if (!(lambda_mixing >= 0.0 && lambda_mixing <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "parent: lambda must lie in [0, 1]");
  }
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "parent: max_n must be >= 1");
  if (records.empty()) return {};
  std::vector<std::tuple<std::string, double, double>> scores;
  scores.reserve(records.size());
  for (const auto &record : records) {
    if (record.table.pairs.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "parent: record '" + record.id + "' has no table");
    }
    const auto score = ScoreRecord(record, lambda_mixing, smoothing, max_n);
    scores.emplace_back(record.id, score.precision, score.recall);
  }
  // Fixed summation order makes the corpus score independent of input order.
  std::sort(scores.begin(), scores.end());
  ParentScore out;
  for (const auto &[id, p, r] : scores) {
    out.precision += p;
    out.recall += r;
  }
  out.precision /= static_cast<double>(scores.size());
  out.recall /= static_cast<double>(scores.size());
  const double sum = out.precision + out.recall;
  out.f = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

}  // namespace mbdtg::metrics
