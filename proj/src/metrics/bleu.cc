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

#include "mbdtg/error.h"
#include "mbdtg/metrics.h"

namespace mbdtg::metrics {
namespace {

std::map<Tokens, int> NgramCounts(const Tokens &tokens, int n) {
  std::map<Tokens, int> counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

double Bleu(const std::vector<EvalRecord> &records, int max_n, BleuSmoothing smoothing) {
  if (max_n < 1) throw Error(ErrorCode::kInvalidArgument, "bleu: max_n must be >= 1");
  std::vector<long> matches(max_n, 0), totals(max_n, 0);
  long candidate_length = 0, reference_length = 0;
  for (const auto &record : records) {
    candidate_length += static_cast<long>(record.candidate.size());
    reference_length += static_cast<long>(record.reference.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto candidate = NgramCounts(record.candidate, n);
      const auto reference = NgramCounts(record.reference, n);
      for (const auto &[gram, count] : candidate) {
        auto it = reference.find(gram);
        if (it != reference.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }
  if (candidate_length == 0) return 0.0;

  const bool any_zero = std::any_of(matches.begin(), matches.end(), [](long m) { return m == 0; });
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    double m = static_cast<double>(matches[n - 1]);
    double t = static_cast<double>(totals[n - 1]);
    if (smoothing == BleuSmoothing::kAddOne && any_zero && n >= 2) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t) / max_n;
  }
  const double brevity =
      candidate_length > reference_length
          ? 1.0
          : std::exp(1.0 - static_cast<double>(reference_length) / candidate_length);
  return std::clamp(brevity * std::exp(log_sum), 0.0, 1.0);
}

}  // namespace mbdtg::metrics
