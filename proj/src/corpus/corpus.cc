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

#include "mbdtg/corpus.h"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "mbdtg/checksum.h"
#include "mbdtg/error.h"

namespace mbdtg::corpus {
namespace {

using ordered_json = nlohmann::ordered_json;

bool HasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

bool IsLowercase(std::string_view s) {
  return std::none_of(s.begin(), s.end(),
                      [](unsigned char c) { return std::isupper(c) != 0; });
}

std::string Uppercase(std::string_view text) {
  std::string out(text);
  for (auto &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void Malformed(int line_number, const std::string &what) {
  throw Error(ErrorCode::kMalformed,
              "malformed record at line " + std::to_string(line_number) + ": " + what);
}

std::string ExpectString(const ordered_json &j, int line_number, const std::string &field) {
  if (!j.is_string()) Malformed(line_number, field + " must be a string");
  return j.get<std::string>();
}

}  // namespace

std::vector<std::string> ParsedSentence::Surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto &t : tokens) out.push_back(t.surface);
  return out;
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split: " + std::string(name));
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

const std::set<std::string> &UniversalPosTags() {
  static const std::set<std::string> kTags = {
      "ADJ", "ADP", "ADV",  "AUX",   "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
      "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
  return kTags;
}

std::string Lowercase(std::string_view text) {
  std::string out(text);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> ValidateInstance(const Instance &inst) {
  std::vector<std::string> report;
  if (inst.id.empty()) report.push_back("empty id");

  if (inst.table.pairs.empty()) report.push_back("table is empty");
  for (size_t i = 0; i < inst.table.pairs.size(); ++i) {
    const auto &pair = inst.table.pairs[i];
    const std::string where = "pair " + std::to_string(i + 1) + ": ";
    if (pair.key.empty()) report.push_back(where + "empty key");
    if (HasWhitespace(pair.key)) report.push_back(where + "key contains whitespace");
    if (!IsLowercase(pair.key)) report.push_back(where + "key not lowercase");
    if (pair.value_tokens.empty()) report.push_back(where + "empty value");
    for (const auto &tok : pair.value_tokens) {
      if (tok.empty()) report.push_back(where + "empty value token");
      if (HasWhitespace(tok)) report.push_back(where + "value token contains whitespace");
      if (!IsLowercase(tok)) report.push_back(where + "value token not lowercase");
    }
  }

  const auto &tokens = inst.reference.tokens;
  const int n = static_cast<int>(tokens.size());
  if (n == 0) report.push_back("reference is empty");
  int roots = 0;
  bool heads_in_range = true;
  for (int t = 0; t < n; ++t) {
    const auto &tok = tokens[t];
    const std::string where = "token " + std::to_string(t + 1) + ": ";
    if (tok.surface.empty()) report.push_back(where + "empty surface");
    if (HasWhitespace(tok.surface)) report.push_back(where + "surface contains whitespace");
    if (!IsLowercase(tok.surface)) report.push_back(where + "surface not lowercase");
    if (UniversalPosTags().count(tok.pos) == 0) {
      report.push_back(where + "unknown upos '" + tok.pos + "'");
    }
    if (tok.deprel.empty()) report.push_back(where + "empty deprel");
    if (tok.head == kRoot) {
      ++roots;
    } else if (tok.head == t) {
      report.push_back(where + "head equals own index");
      heads_in_range = false;
    } else if (tok.head < 0 || tok.head >= n) {
      report.push_back(where + "head out of range");
      heads_in_range = false;
    }
  }
  if (n > 0 && roots == 0) report.push_back("no root");
  if (roots > 1) report.push_back("multiple roots");

  // Every token must reach the root within n hops.
  if (heads_in_range && roots >= 1) {
    for (int t = 0; t < n; ++t) {
      int node = t;
      int hops = 0;
      while (node != kRoot && hops <= n) {
        node = tokens[node].head;
        ++hops;
      }
      if (node != kRoot) {
        report.push_back("head links contain a cycle");
        break;
      }
    }
  }
  return report;
}

std::string SerializeInstance(const Instance &inst) {
  ordered_json record;
  record["id"] = inst.id;
  ordered_json table = ordered_json::array();
  for (const auto &pair : inst.table.pairs) {
    table.push_back(ordered_json::array({pair.key, pair.value_tokens}));
  }
  record["table"] = std::move(table);
  ordered_json reference = ordered_json::array();
  for (const auto &tok : inst.reference.tokens) {
    ordered_json entry = ordered_json::array(
        {tok.surface, tok.pos, tok.head == kRoot ? 0 : tok.head + 1, tok.deprel});
    if (!tok.original.empty()) entry.push_back(tok.original);
    reference.push_back(std::move(entry));
  }
  record["reference"] = std::move(reference);
  return record.dump();
}

Instance ParseInstance(std::string_view line, int line_number) {
  ordered_json record;
  try {
    record = ordered_json::parse(line);
  } catch (const nlohmann::json::exception &) {
    Malformed(line_number, "invalid json");
  }
  if (!record.is_object()) Malformed(line_number, "record must be an object");
  for (const char *field : {"id", "table", "reference"}) {
    if (!record.contains(field)) Malformed(line_number, std::string("missing field ") + field);
  }
  if (record.size() != 3) Malformed(line_number, "unexpected field");

  Instance inst;
  inst.id = ExpectString(record["id"], line_number, "id");

  const auto &table = record["table"];
  if (!table.is_array()) Malformed(line_number, "table must be a list");
  for (const auto &entry : table) {
    if (!entry.is_array() || entry.size() != 2 || !entry[1].is_array()) {
      Malformed(line_number, "table entry must be [key, [value tokens]]");
    }
    KeyValuePair pair;
    pair.key = Lowercase(ExpectString(entry[0], line_number, "table key"));
    for (const auto &tok : entry[1]) {
      pair.value_tokens.push_back(Lowercase(ExpectString(tok, line_number, "table value")));
    }
    inst.table.pairs.push_back(std::move(pair));
  }

  const auto &reference = record["reference"];
  if (!reference.is_array()) Malformed(line_number, "reference must be a list");
  for (const auto &entry : reference) {
    if (!entry.is_array() || (entry.size() != 4 && entry.size() != 5)) {
      Malformed(line_number, "reference token must be [surface, upos, head, deprel]");
    }
    Token tok;
    tok.surface = Lowercase(ExpectString(entry[0], line_number, "token surface"));
    tok.pos = Uppercase(ExpectString(entry[1], line_number, "token upos"));
    if (!entry[2].is_number_integer()) Malformed(line_number, "token head must be an integer");
    const long head = entry[2].get<long>();
    if (head < 0 || head > static_cast<long>(reference.size())) {
      Malformed(line_number, "token head out of range");
    }
    tok.head = head == 0 ? kRoot : static_cast<int>(head - 1);
    tok.deprel = Lowercase(ExpectString(entry[3], line_number, "token deprel"));
    if (entry.size() == 5) tok.original = ExpectString(entry[4], line_number, "token original");
    inst.reference.tokens.push_back(std::move(tok));
  }

  auto violations = ValidateInstance(inst);
  if (!violations.empty()) Malformed(line_number, violations.front());
  return inst;
}

std::string SerializeCorpus(const Corpus &corpus) {
  std::string out;
  for (const auto &inst : corpus.instances) {
    out += SerializeInstance(inst);
    out += '\n';
  }
  return out;
}

Corpus ParseCorpus(std::string_view text, Split split) {
  Corpus corpus;
  corpus.split = split;
  std::unordered_set<std::string> seen;
  int line_number = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    Instance inst = ParseInstance(line, line_number);
    if (!seen.insert(inst.id).second) {
      throw Error(ErrorCode::kMalformed, "duplicate id '" + inst.id + "' at line " +
                                             std::to_string(line_number));
    }
    corpus.instances.push_back(std::move(inst));
  }
  if (corpus.instances.empty()) throw Error(ErrorCode::kMalformed, "empty corpus");
  return corpus;
}

Corpus LoadCorpus(const std::string &path, Split split) {
  return ParseCorpus(ReadFile(path), split);
}

void WriteCorpus(const Corpus &corpus, const std::string &path) {
  WriteFile(path, SerializeCorpus(corpus));
}

PosLexicon::PosLexicon(const Corpus &corpus) {
  for (const auto &inst : corpus.instances) {
    for (const auto &tok : inst.reference.tokens) Add(tok.surface, tok.pos);
  }
}

void PosLexicon::Add(const std::string &word, const std::string &pos) {
  ++counts_[word][pos];
}

std::string PosLexicon::Tag(const std::string &word) const {
  auto it = counts_.find(word);
  if (it != counts_.end()) {
    std::string best;
    int best_count = -1;
    for (const auto &[pos, count] : it->second) {
      if (count > best_count) {
        best = pos;
        best_count = count;
      }
    }
    return best;
  }
  const auto is_digit = [](unsigned char c) { return std::isdigit(c) != 0; };
  const auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
  if (!word.empty() && std::all_of(word.begin(), word.end(), is_digit)) return "NUM";
  if (!word.empty() && std::all_of(word.begin(), word.end(), is_punct)) return "PUNCT";
  return "NOUN";
}

ParsedSentence IdentityParse(const std::vector<std::string> &surfaces,
                             const PosLexicon &lexicon,
                             const std::set<std::string> &important_pos) {
  ParsedSentence sentence;
  const int n = static_cast<int>(surfaces.size());
  std::vector<bool> important(n);
  int root = -1;
  for (int t = 0; t < n; ++t) {
    Token tok;
    tok.surface = Lowercase(surfaces[t]);
    tok.pos = lexicon.Tag(tok.surface);
    important[t] = important_pos.count(tok.pos) > 0;
    if (important[t] && root < 0) root = t;
    sentence.tokens.push_back(std::move(tok));
  }
  if (n == 0) return sentence;
  if (root < 0) root = 0;

  int previous_important = -1;
  for (int t = 0; t < n; ++t) {
    auto &tok = sentence.tokens[t];
    if (t == root) {
      tok.head = kRoot;
      tok.deprel = "root";
    } else if (important[t]) {
      tok.head = root;
      tok.deprel = "parataxis";
    } else {
      int anchor = previous_important;
      if (anchor < 0) {
        for (int u = t + 1; u < n; ++u) {
          if (important[u]) {
            anchor = u;
            break;
          }
        }
      }
      tok.head = anchor < 0 ? root : anchor;
      tok.deprel = "dep";
    }
    if (important[t]) previous_important = t;
  }
  return sentence;
}

}  // namespace mbdtg::corpus
