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

#ifndef MBDTG_COOCCUR_H_
#define MBDTG_COOCCUR_H_

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "mbdtg/corpus.h"

namespace mbdtg::cooccur {

// Identity of a table row for counting: key plus space-joined value.
struct PairKey {
  std::string key;
  std::string value;

  auto operator<=>(const PairKey &) const = default;
};

PairKey MakePairKey(const corpus::KeyValuePair &pair);

// Corpus-wide counts co(w, x): the number of training instances whose
// reference contains word w and whose table contains pair x.
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;

  uint64_t Count(const std::string &word, const PairKey &pair) const;
  uint64_t Count(const std::string &word, const corpus::KeyValuePair &pair) const {
    return Count(word, MakePairKey(pair));
  }
  // M for the pair: max over words of Count(word, pair). 0 for unseen pairs.
  uint64_t PairMax(const PairKey &pair) const;
  bool HasPair(const PairKey &pair) const { return pair_max_.count(pair) > 0; }

  const std::set<std::string> &vocab() const { return vocab_; }
  const std::map<PairKey, std::map<std::string, uint64_t>> &counts() const {
    return counts_;
  }
  size_t entry_count() const;

  uint64_t instance_count() const { return instance_count_; }
  const std::string &corpus_checksum() const { return corpus_checksum_; }

  // Adds `count` to the (word, pair) cell and keeps M and vocab consistent.
  void Add(const std::string &word, const PairKey &pair, uint64_t count);
  // Commutative merge of a partial index (instance counts add too).
  void Merge(const CooccurrenceIndex &other);

  void set_instance_count(uint64_t n) { instance_count_ = n; }
  void set_corpus_checksum(std::string checksum) { corpus_checksum_ = std::move(checksum); }

  bool operator==(const CooccurrenceIndex &) const = default;

 private:
  std::map<PairKey, std::map<std::string, uint64_t>> counts_;
  std::map<PairKey, uint64_t> pair_max_;
  std::set<std::string> vocab_;
  uint64_t instance_count_ = 0;
  std::string corpus_checksum_;
};

// Counts joint presence per instance; each instance adds at most 1 per cell.
// With threads > 1 instances are partitioned and partial maps merged; the
// result equals the sequential build.
CooccurrenceIndex BuildIndex(const corpus::Corpus &corpus, int threads = 1);

// Text container: header (format version, corpus checksum, instance count,
// entry count), sorted word/key/value/count lines, then a SHA-256 trailer.
std::string SerializeIndex(const CooccurrenceIndex &index);
CooccurrenceIndex ParseIndex(const std::string &text);

void SaveIndex(const CooccurrenceIndex &index, const std::string &path);
CooccurrenceIndex LoadIndex(const std::string &path);

}  // namespace mbdtg::cooccur

#endif  // MBDTG_COOCCUR_H_
