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

#include <string>

#include "doctest.h"
#include "mbdtg/checksum.h"
#include "mbdtg/corpus.h"
#include "mbdtg/error.h"
#include "mbdtg/synthetic.h"
#include "test_util.h"

namespace mbdtg::corpus {
namespace {

const char kFig1[] =
    R"j({"id":"wikibio-fig1","table":[["name",["kian","emadi"]],["fullname",["kian","emadi-coffin"]],)j"
    R"j(["currentteam",["retired"]],["discipline",["track"]],["role",["rider"]],["ridertype",["sprinter"]],)j"
    R"j(["proyears",["2012-present"]],["proteams",["sky","track","cycling"]]],"reference":[)j"
    R"j(["kian","PROPN",13,"nsubj"],["emadi","PROPN",1,"flat"],["(","PUNCT",4,"punct"],)j"
    R"j(["born","VERB",1,"acl"],["29","NUM",6,"nummod"],["july","PROPN",4,"obl"],["1992","NUM",6,"nummod"],)j"
    R"j([")","PUNCT",4,"punct"],["is","AUX",13,"cop"],["a","DET",13,"det"],["british","ADJ",13,"amod"],)j"
    R"j(["track","NOUN",13,"compound"],["cyclist","NOUN",0,"root"],[".","PUNCT",13,"punct"]]})j";

Instance TwoTokens() {
  Instance inst;
  inst.id = "x";
  inst.table.pairs = {{"name", {"ada"}}};
  inst.reference.tokens = {{"ada", "PROPN", kRoot, "root", ""}, {"ran", "VERB", 0, "parataxis", ""}};
  return inst;
}

bool Mentions(const std::vector<std::string> &report, const std::string &needle) {
  for (const auto &line : report) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST_CASE("fig1 record parses into eight pairs and fourteen tokens") {
  const Instance inst = ParseInstance(kFig1, 1);
  CHECK(inst.table.size() == 8);
  CHECK(inst.reference.size() == 14);
  CHECK(inst.reference.tokens[12].head == kRoot);
  CHECK(inst.reference.tokens[0].head == 12);
  CHECK(ValidateInstance(inst).empty());
}

TEST_CASE("serialization round-trips and is canonical") {
  const Instance inst = ParseInstance(kFig1, 1);
  const std::string line = SerializeInstance(inst);
  CHECK(line == kFig1);
  CHECK(ParseInstance(line, 1) == inst);

  std::mt19937_64 rng(3);
  const std::vector<std::string> vocab = {"a", "b", "c", "(", ")", ","};
  for (int trial = 0; trial < 50; ++trial) {
    Corpus c = testing::RandomCorpus(rng, vocab, 5, 8, 4);
    CHECK(ParseCorpus(SerializeCorpus(c), Split::kTrain) == c);
  }
}

TEST_CASE("loading lowercases text and uppercases tags") {
  const Instance inst = ParseInstance(
      R"({"id":"u","table":[["Name",["Ada"]]],"reference":[["Ada","propn",0,"ROOT"]]})", 1);
  CHECK(inst.table.pairs[0].key == "name");
  CHECK(inst.table.pairs[0].value_tokens[0] == "ada");
  CHECK(inst.reference.tokens[0].surface == "ada");
  CHECK(inst.reference.tokens[0].pos == "PROPN");
  CHECK(inst.reference.tokens[0].deprel == "root");
}

TEST_CASE("validation reports each broken invariant") {
  Instance inst = TwoTokens();
  CHECK(ValidateInstance(inst).empty());

  Instance no_table = inst;
  no_table.table.pairs.clear();
  CHECK(Mentions(ValidateInstance(no_table), "table is empty"));

  Instance no_reference = inst;
  no_reference.reference.tokens.clear();
  CHECK(Mentions(ValidateInstance(no_reference), "reference is empty"));

  Instance two_roots = inst;
  two_roots.reference.tokens[1].head = kRoot;
  CHECK(Mentions(ValidateInstance(two_roots), "multiple roots"));

  Instance cycle = inst;
  cycle.reference.tokens.push_back({"on", "ADP", 1, "case", ""});
  cycle.reference.tokens[1].head = 2;
  CHECK(Mentions(ValidateInstance(cycle), "cycle"));

  Instance self = inst;
  self.reference.tokens[1].head = 1;
  CHECK(Mentions(ValidateInstance(self), "head equals own index"));

  Instance bad_tag = inst;
  bad_tag.reference.tokens[1].pos = "VB";
  CHECK(Mentions(ValidateInstance(bad_tag), "unknown upos"));

  Instance empty_value = inst;
  empty_value.table.pairs[0].value_tokens.clear();
  CHECK(Mentions(ValidateInstance(empty_value), "empty value"));
}

TEST_CASE("malformed records name the line and the problem") {
  const std::string good = SerializeInstance(TwoTokens());
  const std::string missing = R"({"id":"y","table":[["name",["ada"]]]})";
  try {
    ParseCorpus(good + "\n" + missing + "\n", Split::kTrain);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kMalformed);
    CHECK(std::string(e.what()) == "malformed record at line 2: missing field reference");
  }
  CHECK_THROWS_WITH(ParseCorpus(good + "\n" + good + "\n", Split::kTrain),
                    "duplicate id 'x' at line 2");
  CHECK_THROWS_WITH(ParseCorpus("\n\n", Split::kTrain), "empty corpus");
  CHECK_THROWS_AS(ParseInstance("{not json", 1), Error);
}

TEST_CASE("split names") {
  CHECK(ParseSplit("valid") == Split::kValid);
  CHECK(SplitName(Split::kTest) == "test");
  CHECK_THROWS_AS(ParseSplit("dev"), Error);
}

TEST_CASE("conllu import maps bracket tokens and pairs tables by order") {
  const std::string tables = R"({"id":"s1","table":[["name",["ada","lovelace"]]]})"
                             "\n";
  const std::string conllu =
      "# sent_id = s1\n"
      "1\tAda\tada\tPROPN\t_\t_\t4\tnsubj\t_\t_\n"
      "2\t-lrb-\t_\tPUNCT\t_\t_\t3\tpunct\t_\t_\n"
      "3\tpoet\t_\tNOUN\t_\t_\t1\tappos\t_\t_\n"
      "4\twrote\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
      "5-6\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "5\t-rrb-\t_\tPUNCT\t_\t_\t4\tpunct\t_\t_\n"
      "\n";
  const Corpus c = ImportConllu(conllu, tables, Split::kTrain);
  REQUIRE(c.size() == 1);
  const auto &tokens = c.instances[0].reference.tokens;
  REQUIRE(tokens.size() == 5);
  CHECK(tokens[0].surface == "ada");
  CHECK(tokens[1].surface == "(");
  CHECK(tokens[1].original == "-lrb-");
  CHECK(tokens[4].surface == ")");
  CHECK(tokens[3].head == kRoot);

  const std::string wrong_id = "# sent_id = s2\n" + conllu.substr(conllu.find('\n') + 1);
  CHECK_THROWS_AS(ImportConllu(wrong_id, tables, Split::kTrain), Error);
}

TEST_CASE("pos lexicon uses majority tags and shape fallbacks") {
  PosLexicon lexicon;
  lexicon.Add("run", "VERB");
  lexicon.Add("run", "NOUN");
  lexicon.Add("run", "VERB");
  CHECK(lexicon.Tag("run") == "VERB");
  CHECK(lexicon.Tag("1992") == "NUM");
  CHECK(lexicon.Tag(",") == "PUNCT");
  CHECK(lexicon.Tag("zebra") == "NOUN");
}

TEST_CASE("identity parse makes every important token a statement root") {
  PosLexicon lexicon;
  lexicon.Add("the", "DET");
  lexicon.Add("is", "AUX");
  lexicon.Add("a", "DET");
  lexicon.Add("kian", "PROPN");
  const std::set<std::string> important = {"NUM", "ADJ", "NOUN", "PROPN"};
  const ParsedSentence s =
      IdentityParse({"the", "kian", "is", "a", "cyclist", "."}, lexicon, important);
  REQUIRE(s.size() == 6);
  CHECK(s.tokens[1].head == kRoot);
  CHECK(s.tokens[4].head == 1);
  CHECK(s.tokens[4].deprel == "parataxis");
  CHECK(s.tokens[0].head == 1);  // no important token before it
  CHECK(s.tokens[2].head == 1);
  CHECK(s.tokens[5].head == 4);
  CHECK(s.tokens[5].pos == "PUNCT");
  Instance inst{"p", {{{"name", {"kian"}}}}, s};
  CHECK(ValidateInstance(inst).empty());

  const ParsedSentence none = IdentityParse({"is", "a"}, lexicon, important);
  CHECK(none.tokens[0].head == kRoot);
  CHECK(none.tokens[1].head == 0);
}

TEST_CASE("synthetic corpus is valid, deterministic and plants about 30% of tokens") {
  const SyntheticCorpus a = MakeSyntheticCorpus({});
  const SyntheticCorpus b = MakeSyntheticCorpus({});
  CHECK(a.corpus == b.corpus);
  CHECK(a.corpus.size() == 50);
  for (const auto &inst : a.corpus.instances) CHECK(ValidateInstance(inst).empty());
  CHECK(a.PlantedFraction() > 0.2);
  CHECK(a.PlantedFraction() < 0.4);
  SyntheticOptions other;
  other.seed = 8;
  CHECK(!(MakeSyntheticCorpus(other).corpus == a.corpus));
}

TEST_CASE("checksums and missing files") {
  CHECK(Sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  try {
    ReadFile("/nonexistent/input.jsonl");
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNotFound);
    CHECK(std::string(e.what()).find("no such input") != std::string::npos);
  }
}

}  // namespace
}  // namespace mbdtg::corpus
