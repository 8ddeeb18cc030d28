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

#include "mbdtg/labeler.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <thread>

#include "mbdtg/error.h"

namespace mbdtg::labeler {
namespace {

std::string BaseRelation(const std::string &deprel) {
  return deprel.substr(0, deprel.find(':'));
}

enum class Delimiter { kNone, kOpenParen, kCloseParen, kOpenQuote, kCloseQuote, kSymmetricQuote };

Delimiter ClassifyDelimiter(const std::string &surface) {
  if (surface == "(") return Delimiter::kOpenParen;
  if (surface == ")") return Delimiter::kCloseParen;
  if (surface == "``") return Delimiter::kOpenQuote;
  if (surface == "''") return Delimiter::kCloseQuote;
  if (surface == "\"") return Delimiter::kSymmetricQuote;
  return Delimiter::kNone;
}

}  // namespace

Diagnostics &Diagnostics::operator+=(const Diagnostics &other) {
  degenerate_pairs += other.degenerate_pairs;
  unbalanced_delimiters += other.unbalanced_delimiters;
  empty_filtered += other.empty_filtered;
  return *this;
}

void LabelerConfig::Check() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "labeler: tau must lie in [0, 1]");
  }
  if (m < 0) throw Error(ErrorCode::kInvalidArgument, "labeler: m must be non-negative");
  if (important_pos.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "labeler: important_pos must be non-empty");
  }
}

const std::set<std::string> &LabelerConfig::ConfigKeys() {
  static const std::set<std::string> kKeys = {"tau", "m", "important_pos",
                                              "introductory_relations"};
  return kKeys;
}

LabelerConfig LabelerConfig::FromConfig(const ConfigFile &config) {
  LabelerConfig cfg;
  cfg.tau = config.GetDouble("tau", cfg.tau);
  cfg.m = config.GetInt("m", cfg.m);
  if (config.Has("important_pos")) {
    auto tags = config.GetList("important_pos", {});
    cfg.important_pos = {tags.begin(), tags.end()};
  }
  if (config.Has("introductory_relations")) {
    auto rels = config.GetList("introductory_relations", {});
    cfg.introductory_relations = {rels.begin(), rels.end()};
  }
  cfg.Check();
  return cfg;
}

double Align(const std::string &word, const corpus::KeyValuePair &pair,
             const cooccur::CooccurrenceIndex &index, const LabelerConfig &cfg,
             Diagnostics *diagnostics) {
  if (word == pair.key ||
      std::find(pair.value_tokens.begin(), pair.value_tokens.end(), word) !=
          pair.value_tokens.end()) {
    return 1.0;
  }
  const auto key = cooccur::MakePairKey(pair);
  const double c = static_cast<double>(index.Count(word, key));
  const double max = static_cast<double>(index.PairMax(key));
  const double floor = static_cast<double>(cfg.m);
  if (max <= floor) {
    // The quadratic ramp is undefined without room between m and M.
    if (diagnostics != nullptr) ++diagnostics->degenerate_pairs;
    return c > floor ? 1.0 : 0.0;
  }
  if (c <= floor) return 0.0;
  const double a = 1.0 / ((max - floor) * (max - floor));
  return std::clamp(a * (c - floor) * (c - floor), 0.0, 1.0);
}

std::optional<double> RawScore(int token_index, const corpus::ParsedSentence &sentence,
                               const corpus::EntityTable &table,
                               const cooccur::CooccurrenceIndex &index,
                               const LabelerConfig &cfg, Diagnostics *diagnostics,
                               bool *membership) {
  if (membership != nullptr) *membership = false;
  const auto &tok = sentence.tokens.at(token_index);
  if (cfg.important_pos.count(tok.pos) == 0) return std::nullopt;
  double best = 0.0;
  for (const auto &pair : table.pairs) {
    const double score = Align(tok.surface, pair, index, cfg, diagnostics);
    if (score == 1.0 && membership != nullptr &&
        (tok.surface == pair.key ||
         std::find(pair.value_tokens.begin(), pair.value_tokens.end(), tok.surface) !=
             pair.value_tokens.end())) {
      *membership = true;
    }
    best = std::max(best, score);
  }
  return best;
}

std::vector<Statement> SegmentStatements(const corpus::ParsedSentence &sentence,
                                         const LabelerConfig &cfg) {
  const int n = static_cast<int>(sentence.size());
  std::vector<bool> is_root(n, false);
  for (int t = 0; t < n; ++t) {
    const auto &tok = sentence.tokens[t];
    is_root[t] = tok.head == corpus::kRoot ||
                 cfg.introductory_relations.count(BaseRelation(tok.deprel)) > 0;
  }
  std::vector<int> statement_of_root(n, -1);
  std::vector<Statement> statements;
  for (int t = 0; t < n; ++t) {
    if (is_root[t]) {
      statement_of_root[t] = static_cast<int>(statements.size());
      statements.push_back(Statement{t, {}});
    }
  }
  for (int t = 0; t < n; ++t) {
    int node = t;
    // Tree invariants guarantee termination at the sentence root.
    while (!is_root[node]) node = sentence.tokens[node].head;
    statements[statement_of_root[node]].member_indices.push_back(t);
  }
  return statements;
}

std::vector<double> Normalize(const std::vector<std::optional<double>> &raw_scores,
                              const std::vector<Statement> &statements, size_t sentence_size) {
  std::vector<double> scores(sentence_size, 0.0);
  for (const auto &statement : statements) {
    double sum = 0.0;
    int defined = 0;
    for (int t : statement.member_indices) {
      if (raw_scores[t].has_value()) {
        sum += *raw_scores[t];
        ++defined;
      }
    }
    const double mean = defined == 0 ? 0.0 : sum / defined;
    for (int t : statement.member_indices) scores[t] = mean;
  }
  return scores;
}

std::vector<double> ApplyPunctHeuristics(const std::vector<double> &scores,
                                         const corpus::ParsedSentence &sentence,
                                         const LabelerConfig &cfg, Diagnostics *diagnostics) {
  const int n = static_cast<int>(sentence.size());
  std::vector<double> out = scores;

  // (i) Linear neighbours of commas and coordinating conjunctions.
  for (int t = 0; t < n; ++t) {
    const auto &tok = sentence.tokens[t];
    if (tok.surface != "," && tok.pos != "CCONJ") continue;
    double lowest = std::numeric_limits<double>::infinity();
    for (int u : {t - 1, t + 1}) {
      if (u >= 0 && u < n && scores[u] < cfg.tau) lowest = std::min(lowest, scores[u]);
    }
    if (lowest != std::numeric_limits<double>::infinity()) out[t] = lowest;
  }

  // (ii) Matched delimiters, innermost pairs first.
  std::vector<std::pair<int, Delimiter>> open;
  auto unmatched = [&]() {
    if (diagnostics != nullptr) ++diagnostics->unbalanced_delimiters;
  };
  for (int t = 0; t < n; ++t) {
    Delimiter kind = ClassifyDelimiter(sentence.tokens[t].surface);
    if (kind == Delimiter::kNone) continue;
    Delimiter wanted = Delimiter::kNone;
    if (kind == Delimiter::kCloseParen) wanted = Delimiter::kOpenParen;
    if (kind == Delimiter::kCloseQuote) wanted = Delimiter::kOpenQuote;
    if (kind == Delimiter::kSymmetricQuote) {
      bool has_open = std::any_of(open.begin(), open.end(), [](const auto &entry) {
        return entry.second == Delimiter::kSymmetricQuote;
      });
      if (has_open) wanted = Delimiter::kSymmetricQuote;
    }
    if (wanted == Delimiter::kNone) {
      open.emplace_back(t, kind);
      continue;
    }
    auto match = std::find_if(open.rbegin(), open.rend(),
                              [&](const auto &entry) { return entry.second == wanted; });
    if (match == open.rend()) {
      unmatched();
      continue;
    }
    // Openers nested inside the matched pair are left unmatched.
    const auto match_pos = std::prev(match.base());
    for (auto it = std::next(match_pos); it != open.end(); ++it) unmatched();
    const int begin = match_pos->first;
    open.erase(match_pos, open.end());
    if (t - begin < 2) continue;
    double lowest = std::numeric_limits<double>::infinity();
    for (int u = begin + 1; u < t; ++u) lowest = std::min(lowest, out[u]);
    out[begin] = lowest;
    out[t] = lowest;
  }
  for (size_t i = 0; i < open.size(); ++i) unmatched();
  return out;
}

std::vector<TokenAnnotation> LabelInstance(const corpus::Instance &inst,
                                           const cooccur::CooccurrenceIndex &index,
                                           const LabelerConfig &cfg, Diagnostics *diagnostics) {
  cfg.Check();
  const auto &sentence = inst.reference;
  const int n = static_cast<int>(sentence.size());
  std::vector<std::optional<double>> raw(n);
  std::vector<TokenAnnotation> annotations(n);
  for (int t = 0; t < n; ++t) {
    bool membership = false;
    raw[t] = RawScore(t, sentence, inst.table, index, cfg, diagnostics, &membership);
    annotations[t].important = raw[t].has_value();
    annotations[t].membership = membership;
  }
  const auto statements = SegmentStatements(sentence, cfg);
  const auto normalized = Normalize(raw, statements, sentence.size());
  const auto scores = ApplyPunctHeuristics(normalized, sentence, cfg, diagnostics);
  for (size_t s = 0; s < statements.size(); ++s) {
    for (int t : statements[s].member_indices) annotations[t].statement_id = static_cast<int>(s);
  }
  for (int t = 0; t < n; ++t) {
    annotations[t].score = scores[t];
    annotations[t].label = scores[t] > cfg.tau ? 1 : 0;
  }
  return annotations;
}

std::vector<std::vector<TokenAnnotation>> LabelCorpus(const corpus::Corpus &corpus,
                                                      const cooccur::CooccurrenceIndex &index,
                                                      const LabelerConfig &cfg, int threads,
                                                      Diagnostics *diagnostics) {
  const size_t n = corpus.instances.size();
  std::vector<std::vector<TokenAnnotation>> out(n);
  const size_t workers = std::clamp<size_t>(threads < 1 ? 1 : threads, 1, std::max<size_t>(n, 1));
  std::vector<Diagnostics> partial(workers);
  auto work = [&](size_t w) {
    for (size_t i = n * w / workers; i < n * (w + 1) / workers; ++i) {
      out[i] = LabelInstance(corpus.instances[i], index, cfg, &partial[w]);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto &t : pool) t.join();
  }
  if (diagnostics != nullptr) {
    for (const auto &d : partial) *diagnostics += d;
  }
  return out;
}

FilteredReference FilterReference(const corpus::Instance &inst,
                                  const std::vector<TokenAnnotation> &annotations) {
  if (annotations.size() != inst.reference.size()) {
    throw Error(ErrorCode::kInvalidArgument, "filter: annotation count mismatch");
  }
  FilteredReference out;
  for (size_t t = 0; t < annotations.size(); ++t) {
    if (annotations[t].label == 1) {
      out.tokens.push_back(inst.reference.tokens[t].surface);
      out.kept_indices.push_back(static_cast<int>(t));
    }
  }
  out.empty = out.tokens.empty();
  return out;
}

std::string FormatLabelLine(const corpus::Instance &inst,
                            const std::vector<TokenAnnotation> &annotations) {
  std::string line = inst.id;
  char buffer[32];
  for (size_t t = 0; t < annotations.size(); ++t) {
    std::snprintf(buffer, sizeof(buffer), "%.4f", annotations[t].score);
    line += ' ';
    line += inst.reference.tokens[t].surface;
    line += '|';
    line += buffer;
    line += '|';
    line += annotations[t].label == 1 ? '1' : '0';
  }
  return line;
}

}  // namespace mbdtg::labeler
