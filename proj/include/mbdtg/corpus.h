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

#ifndef MBDTG_CORPUS_H_
#define MBDTG_CORPUS_H_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mbdtg::corpus {

// One table row: a key and its pre-tokenized value.
struct KeyValuePair {
  std::string key;
  std::vector<std::string> value_tokens;

  bool operator==(const KeyValuePair &) const = default;
};

// Ordered key-value pairs describing a single entity. Order is significant.
struct EntityTable {
  std::vector<KeyValuePair> pairs;

  size_t size() const { return pairs.size(); }
  bool operator==(const EntityTable &) const = default;
};

// Head index of the sentence root (in-memory heads are 0-based).
inline constexpr int kRoot = -1;

struct Token {
  std::string surface;
  std::string pos;     // universal POS tag, uppercase
  int head = kRoot;    // 0-based index of the governor, or kRoot
  std::string deprel;  // lowercase, may carry a ":subtype"
  // Surface before import normalization (e.g. "-lrb-"); empty when unchanged.
  std::string original;

  bool operator==(const Token &) const = default;
};

struct ParsedSentence {
  std::vector<Token> tokens;

  size_t size() const { return tokens.size(); }
  std::vector<std::string> Surfaces() const;
  bool operator==(const ParsedSentence &) const = default;
};

struct Instance {
  std::string id;
  EntityTable table;
  ParsedSentence reference;

  bool operator==(const Instance &) const = default;
};

enum class Split { kTrain, kValid, kTest };

Split ParseSplit(std::string_view name);
std::string_view SplitName(Split split);

struct Corpus {
  std::vector<Instance> instances;
  Split split = Split::kTrain;

  size_t size() const { return instances.size(); }
  bool operator==(const Corpus &) const = default;
};

// The 17 universal POS categories.
const std::set<std::string> &UniversalPosTags();

// Returns every violated invariant of `inst`; empty means valid.
std::vector<std::string> ValidateInstance(const Instance &inst);

// Canonical one-line record for an instance (no trailing newline).
std::string SerializeInstance(const Instance &inst);
// Parses one record, lowercasing text fields. `line_number` is used in errors.
Instance ParseInstance(std::string_view line, int line_number);

// Canonical corpus text: one record per line, each terminated by '\n'.
std::string SerializeCorpus(const Corpus &corpus);
Corpus ParseCorpus(std::string_view text, Split split);

Corpus LoadCorpus(const std::string &path, Split split);
void WriteCorpus(const Corpus &corpus, const std::string &path);

// Lowercases ASCII letters; other bytes pass through.
std::string Lowercase(std::string_view text);

// Reads 10-column CoNLL-U reference parses paired, in order, with a table
// file of `{"id": ..., "table": [...]}` lines. "-lrb-"/"-rrb-" become "("
// and ")" with the original surface recorded.
Corpus ImportConllu(std::string_view conllu_text, std::string_view tables_text,
                    Split split);

// Most-frequent POS per word, observed in reference parses.
class PosLexicon {
 public:
  PosLexicon() = default;
  explicit PosLexicon(const Corpus &corpus);

  void Add(const std::string &word, const std::string &pos);
  // Known words get their majority tag (ties broken lexicographically);
  // digits-only words are NUM, punctuation-only words PUNCT, anything else NOUN.
  std::string Tag(const std::string &word) const;

 private:
  std::map<std::string, std::map<std::string, int>> counts_;
};

// Token-level parse for sentences the toolkit cannot parse itself (generated
// outputs, filtered references). The first important token is the root; every
// other important token attaches to it by `parataxis`, so each important token
// opens its own statement. Other tokens attach by `dep` to the nearest
// preceding important token (or the first following one).
ParsedSentence IdentityParse(const std::vector<std::string> &surfaces,
                             const PosLexicon &lexicon,
                             const std::set<std::string> &important_pos);

}  // namespace mbdtg::corpus

#endif  // MBDTG_CORPUS_H_
