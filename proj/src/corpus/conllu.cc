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

#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "mbdtg/corpus.h"
#include "mbdtg/error.h"

namespace mbdtg::corpus {
namespace {

struct TableLine {
  std::string id;
  EntityTable table;
};

std::vector<TableLine> ParseTables(std::string_view text) {
  std::vector<TableLine> tables;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &) {
      throw Error(ErrorCode::kMalformed,
                  "malformed table at line " + std::to_string(line_number));
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("table") ||
        !record["id"].is_string() || !record["table"].is_array()) {
      throw Error(ErrorCode::kMalformed,
                  "malformed table at line " + std::to_string(line_number));
    }
    TableLine entry;
    entry.id = record["id"].get<std::string>();
    for (const auto &kv : record["table"]) {
      if (!kv.is_array() || kv.size() != 2 || !kv[0].is_string() || !kv[1].is_array()) {
        throw Error(ErrorCode::kMalformed,
                    "malformed table entry at line " + std::to_string(line_number));
      }
      KeyValuePair pair;
      pair.key = Lowercase(kv[0].get<std::string>());
      for (const auto &tok : kv[1]) {
        if (!tok.is_string()) {
          throw Error(ErrorCode::kMalformed,
                      "malformed table value at line " + std::to_string(line_number));
        }
        pair.value_tokens.push_back(Lowercase(tok.get<std::string>()));
      }
      entry.table.pairs.push_back(std::move(pair));
    }
    tables.push_back(std::move(entry));
  }
  return tables;
}

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> columns;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    columns.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return columns;
}

struct ConlluSentence {
  std::string sent_id;
  ParsedSentence sentence;
  int first_line = 0;
};

std::vector<ConlluSentence> ParseConllu(std::string_view text) {
  std::vector<ConlluSentence> sentences;
  ConlluSentence current;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_number = 0;
  auto flush = [&]() {
    if (!current.sentence.tokens.empty()) sentences.push_back(std::move(current));
    current = ConlluSentence{};
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string prefix = "# sent_id = ";
      if (line.rfind(prefix, 0) == 0) current.sent_id = line.substr(prefix.size());
      continue;
    }
    auto columns = SplitTabs(line);
    if (columns.size() != 10) {
      throw Error(ErrorCode::kMalformed, "conllu line " + std::to_string(line_number) +
                                             ": expected 10 columns");
    }
    // Multiword ranges and empty nodes carry no head of their own.
    if (columns[0].find_first_of("-.") != std::string::npos) continue;
    if (current.sentence.tokens.empty()) current.first_line = line_number;
    Token tok;
    std::string form = Lowercase(columns[1]);
    if (form == "-lrb-" || form == "-rrb-") {
      tok.original = form;
      form = form == "-lrb-" ? "(" : ")";
    }
    tok.surface = std::move(form);
    tok.pos = columns[3];
    try {
      const int head = std::stoi(columns[6]);
      tok.head = head == 0 ? kRoot : head - 1;
    } catch (const std::exception &) {
      throw Error(ErrorCode::kMalformed,
                  "conllu line " + std::to_string(line_number) + ": bad head");
    }
    tok.deprel = Lowercase(columns[7]);
    current.sentence.tokens.push_back(std::move(tok));
  }
  flush();
  return sentences;
}

}  // namespace

Corpus ImportConllu(std::string_view conllu_text, std::string_view tables_text,
                    Split split) {
  auto tables = ParseTables(tables_text);
  auto sentences = ParseConllu(conllu_text);
  if (tables.size() != sentences.size()) {
    throw Error(ErrorCode::kMalformed,
                "table count " + std::to_string(tables.size()) +
                    " does not match sentence count " + std::to_string(sentences.size()));
  }
  Corpus corpus;
  corpus.split = split;
  std::unordered_set<std::string> seen;
  for (size_t i = 0; i < tables.size(); ++i) {
    if (!sentences[i].sent_id.empty() && sentences[i].sent_id != tables[i].id) {
      throw Error(ErrorCode::kMalformed, "sent_id '" + sentences[i].sent_id +
                                             "' does not match table id '" + tables[i].id + "'");
    }
    Instance inst;
    inst.id = tables[i].id;
    inst.table = std::move(tables[i].table);
    inst.reference = std::move(sentences[i].sentence);
    auto violations = ValidateInstance(inst);
    if (!violations.empty()) {
      throw Error(ErrorCode::kMalformed, "invalid sentence at conllu line " +
                                             std::to_string(sentences[i].first_line) + ": " +
                                             violations.front());
    }
    if (!seen.insert(inst.id).second) {
      throw Error(ErrorCode::kMalformed, "duplicate id '" + inst.id + "'");
    }
    corpus.instances.push_back(std::move(inst));
  }
  if (corpus.instances.empty()) throw Error(ErrorCode::kMalformed, "empty corpus");
  return corpus;
}

}  // namespace mbdtg::corpus
