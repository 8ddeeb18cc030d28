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
#include <cctype>
#include <cstdio>

#include "json.hpp"
#include "mbdtg/error.h"
#include "mbdtg/metrics.h"

namespace mbdtg::metrics {
namespace {

bool IsVowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

}  // namespace

double HallucinationRate(const std::vector<corpus::Instance> &outputs,
                         const cooccur::CooccurrenceIndex &index,
                         const labeler::LabelerConfig &cfg) {
  long total = 0, hallucinated = 0;
  for (const auto &output : outputs) {
    for (const auto &annotation : labeler::LabelInstance(output, index, cfg)) {
      ++total;
      hallucinated += annotation.label == 0 ? 1 : 0;
    }
  }
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "no outputs");
  return static_cast<double>(hallucinated) / static_cast<double>(total);
}

double MeanLength(const std::vector<Tokens> &outputs) {
  if (outputs.empty()) throw Error(ErrorCode::kInvalidArgument, "no outputs");
  long words = 0;
  for (const auto &output : outputs) words += static_cast<long>(output.size());
  return static_cast<double>(words) / static_cast<double>(outputs.size());
}

bool IsPunctuation(const std::string &token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](unsigned char c) {
    return std::ispunct(c) != 0;
  });
}

int CountSyllables(const std::string &word) {
  std::string letters;
  for (unsigned char c : word) {
    if (std::isalpha(c)) letters.push_back(static_cast<char>(std::tolower(c)));
    else letters.push_back(' ');
  }
  int groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool vowel = IsVowel(c);
    if (vowel && !in_group) ++groups;
    in_group = vowel;
  }
  const size_t n = letters.size();
  // A lone final "e" is silent, except in consonant + "le" endings.
  if (n >= 2 && letters[n - 1] == 'e' && std::isalpha(static_cast<unsigned char>(letters[n - 2])) &&
      !IsVowel(letters[n - 2])) {
    const bool consonant_le = letters[n - 2] == 'l' && n >= 3 &&
                              std::isalpha(static_cast<unsigned char>(letters[n - 3])) &&
                              !IsVowel(letters[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

double Flesch(const std::vector<Tokens> &outputs) {
  if (outputs.empty()) throw Error(ErrorCode::kInvalidArgument, "no outputs");
  long words = 0, syllables = 0;
  for (const auto &output : outputs) {
    for (const auto &token : output) {
      if (IsPunctuation(token)) continue;
      ++words;
      syllables += CountSyllables(token);
    }
  }
  if (words == 0) throw Error(ErrorCode::kInvalidArgument, "no words");
  const double sentences = static_cast<double>(outputs.size());
  return 206.835 - 1.015 * (static_cast<double>(words) / sentences) -
         84.6 * (static_cast<double>(syllables) / static_cast<double>(words));
}

std::string MetricReport::ToJson() const {
  nlohmann::ordered_json j;
  j["bleu"] = bleu;
  j["parent_precision"] = parent_precision;
  j["parent_recall"] = parent_recall;
  j["parent_f"] = parent_f;
  j["hallucination_rate"] = hallucination_rate;
  j["mean_length"] = mean_length;
  j["flesch"] = flesch;
  return j.dump(2) + "\n";
}

std::string MetricReport::ToTsv() const {
  std::string out;
  char buffer[64];
  auto row = [&](const char *name, double value) {
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    out += name;
    out += '\t';
    out += buffer;
    out += '\n';
  };
  row("bleu", bleu);
  row("parent_precision", parent_precision);
  row("parent_recall", parent_recall);
  row("parent_f", parent_f);
  row("hallucination_rate", hallucination_rate);
  row("mean_length", mean_length);
  row("flesch", flesch);
  return out;
}

MetricReport Evaluate(const std::vector<EvalRecord> &records,
                      const std::vector<corpus::Instance> &parsed_outputs,
                      const cooccur::CooccurrenceIndex &index,
                      const labeler::LabelerConfig &cfg) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "no outputs");
  MetricReport report;
  report.bleu = Bleu(records);
  const auto parent = Parent(records);
  report.parent_precision = parent.precision;
  report.parent_recall = parent.recall;
  report.parent_f = parent.f;
  report.hallucination_rate = HallucinationRate(parsed_outputs, index, cfg);
  std::vector<Tokens> candidates;
  candidates.reserve(records.size());
  for (const auto &record : records) candidates.push_back(record.candidate);
  report.mean_length = MeanLength(candidates);
  report.flesch = Flesch(candidates);
  return report;
}

}  // namespace mbdtg::metrics
