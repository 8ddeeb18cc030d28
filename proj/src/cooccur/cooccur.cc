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

#include "mbdtg/cooccur.h"

#include <algorithm>
#include <sstream>
#include <thread>
#include <tuple>
#include <vector>

#include "mbdtg/checksum.h"
#include "mbdtg/error.h"

namespace mbdtg::cooccur {
namespace {

constexpr char kMagic[] = "mbdtg-cooccur-index";
constexpr int kFormatVersion = 1;

void CountRange(const corpus::Corpus &corpus, size_t begin, size_t end,
                CooccurrenceIndex *index) {
  for (size_t i = begin; i < end; ++i) {
    const auto &inst = corpus.instances[i];
    std::set<std::string> words;
    for (const auto &tok : inst.reference.tokens) words.insert(tok.surface);
    std::set<PairKey> pairs;
    for (const auto &pair : inst.table.pairs) pairs.insert(MakePairKey(pair));
    for (const auto &pair : pairs) {
      for (const auto &word : words) index->Add(word, pair, 1);
    }
  }
  index->set_instance_count(end - begin);
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

uint64_t ParseCount(const std::string &s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::kMalformed, "index: bad count '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace

PairKey MakePairKey(const corpus::KeyValuePair &pair) {
  PairKey key;
  key.key = pair.key;
  for (size_t i = 0; i < pair.value_tokens.size(); ++i) {
    if (i > 0) key.value += ' ';
    key.value += pair.value_tokens[i];
  }
  return key;
}

uint64_t CooccurrenceIndex::Count(const std::string &word, const PairKey &pair) const {
  auto it = counts_.find(pair);
  if (it == counts_.end()) return 0;
  auto jt = it->second.find(word);
  return jt == it->second.end() ? 0 : jt->second;
}

uint64_t CooccurrenceIndex::PairMax(const PairKey &pair) const {
  auto it = pair_max_.find(pair);
  return it == pair_max_.end() ? 0 : it->second;
}

size_t CooccurrenceIndex::entry_count() const {
  size_t n = 0;
  for (const auto &[pair, words] : counts_) n += words.size();
  return n;
}

void CooccurrenceIndex::Add(const std::string &word, const PairKey &pair, uint64_t count) {
  if (count == 0) return;
  uint64_t &cell = counts_[pair][word];
  cell += count;
  uint64_t &max = pair_max_[pair];
  max = std::max(max, cell);
  vocab_.insert(word);
}

void CooccurrenceIndex::Merge(const CooccurrenceIndex &other) {
  for (const auto &[pair, words] : other.counts_) {
    for (const auto &[word, count] : words) Add(word, pair, count);
  }
  instance_count_ += other.instance_count_;
}

CooccurrenceIndex BuildIndex(const corpus::Corpus &corpus, int threads) {
  if (corpus.instances.empty()) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  if (corpus.split != corpus::Split::kTrain) {
    throw Error(ErrorCode::kInvalidArgument, "co-occurrence counts require the train split");
  }
  const size_t n = corpus.instances.size();
  const size_t workers = std::clamp<size_t>(threads < 1 ? 1 : threads, 1, n);
  std::vector<CooccurrenceIndex> partial(workers);
  if (workers == 1) {
    CountRange(corpus, 0, n, &partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back(CountRange, std::cref(corpus), n * w / workers,
                        n * (w + 1) / workers, &partial[w]);
    }
    for (auto &t : pool) t.join();
  }
  CooccurrenceIndex index;
  for (const auto &part : partial) index.Merge(part);
  index.set_corpus_checksum(Sha256Hex(corpus::SerializeCorpus(corpus)));
  return index;
}

std::string SerializeIndex(const CooccurrenceIndex &index) {
  std::vector<std::tuple<const std::string *, const PairKey *, uint64_t>> rows;
  rows.reserve(index.entry_count());
  for (const auto &[pair, words] : index.counts()) {
    for (const auto &[word, count] : words) rows.emplace_back(&word, &pair, count);
  }
  std::sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) {
    return std::tie(*std::get<0>(a), *std::get<1>(a)) <
           std::tie(*std::get<0>(b), *std::get<1>(b));
  });
  std::ostringstream out;
  out << kMagic << '\t' << kFormatVersion << '\n';
  out << "corpus_sha256\t" << index.corpus_checksum() << '\n';
  out << "instances\t" << index.instance_count() << '\n';
  out << "entries\t" << rows.size() << '\n';
  for (const auto &[word, pair, count] : rows) {
    out << *word << '\t' << pair->key << '\t' << pair->value << '\t' << count << '\n';
  }
  std::string body = out.str();
  body += "sha256\t" + Sha256Hex(body) + '\n';
  return body;
}

CooccurrenceIndex ParseIndex(const std::string &text) {
  // Trailer first: a truncated or edited file fails here.
  const std::string trailer_tag = "sha256\t";
  size_t trailer = text.rfind(trailer_tag);
  if (trailer == std::string::npos || (trailer > 0 && text[trailer - 1] != '\n')) {
    throw Error(ErrorCode::kChecksum, "index checksum missing");
  }
  const std::string body = text.substr(0, trailer);
  std::string stored = text.substr(trailer + trailer_tag.size());
  if (!stored.empty() && stored.back() == '\n') stored.pop_back();
  if (stored != Sha256Hex(body)) throw Error(ErrorCode::kChecksum, "index checksum mismatch");

  std::istringstream in(body);
  std::string line;
  auto header = [&](const std::string &tag) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kMalformed, "index: missing " + tag);
    auto fields = SplitTabs(line);
    if (fields.size() != 2 || fields[0] != tag) {
      throw Error(ErrorCode::kMalformed, "index: bad header line for " + tag);
    }
    return fields[1];
  };
  const std::string version = header(kMagic);
  if (version != std::to_string(kFormatVersion)) {
    throw Error(ErrorCode::kVersion, "index: unsupported format version " + version);
  }
  CooccurrenceIndex index;
  index.set_corpus_checksum(header("corpus_sha256"));
  index.set_instance_count(ParseCount(header("instances")));
  const uint64_t entries = ParseCount(header("entries"));
  uint64_t seen = 0;
  while (std::getline(in, line)) {
    auto fields = SplitTabs(line);
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::kMalformed, "index: bad entry line");
    }
    const uint64_t count = ParseCount(fields[3]);
    if (count == 0) throw Error(ErrorCode::kMalformed, "index: zero count entry");
    index.Add(fields[0], PairKey{fields[1], fields[2]}, count);
    ++seen;
  }
  if (seen != entries) throw Error(ErrorCode::kMalformed, "index: entry count mismatch");
  return index;
}

void SaveIndex(const CooccurrenceIndex &index, const std::string &path) {
  WriteFile(path, SerializeIndex(index));
}

CooccurrenceIndex LoadIndex(const std::string &path) { return ParseIndex(ReadFile(path)); }

}  // namespace mbdtg::cooccur
