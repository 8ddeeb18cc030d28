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

#include <cmath>

#include "doctest.h"
#include "mbdtg/error.h"
#include "mbdtg/metrics.h"
#include "oracles.h"

namespace mbdtg::metrics {
namespace {

EvalRecord Record(std::string id, Tokens candidate, Tokens reference, corpus::EntityTable table) {
  return EvalRecord{std::move(id), std::move(candidate), std::move(reference), std::move(table)};
}

const corpus::EntityTable kTable{{{"name", {"kian", "emadi"}}, {"discipline", {"track"}}}};

TEST_CASE("bleu and parent agree with the brute-force oracles") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const auto records = testing::RandomEvalRecords(rng);
    CHECK(std::abs(Bleu(records) - testing::OracleBleu(records)) <= 1e-9);
    const ParentScore got = Parent(records);
    const ParentScore want = testing::OracleParent(records);
    CHECK(std::abs(got.precision - want.precision) <= 1e-9);
    CHECK(std::abs(got.recall - want.recall) <= 1e-9);
    CHECK(std::abs(got.f - want.f) <= 1e-9);
    CHECK(got.f == 2.0 * got.precision * got.recall / (got.precision + got.recall));
  }
}

TEST_CASE("bleu edge cases") {
  const Tokens sentence = {"kian", "emadi", "is", "a", "track", "cyclist", "."};
  CHECK(Bleu({Record("a", sentence, sentence, kTable)}) == doctest::Approx(1.0));
  CHECK(Bleu({Record("a", {"zzz"}, sentence, kTable)}) == 0.0);
  CHECK(Bleu({Record("a", {}, sentence, kTable)}) == 0.0);
  // Short output: brevity penalty exp(1 - 7/3) with one clipped match per order n <= 3.
  const double bp = std::exp(1.0 - 7.0 / 3.0);
  const double expected = bp * std::pow(1.0 * 1.0 * 1.0 * (1.0 / 1.0), 0.25);
  CHECK(Bleu({Record("a", {"kian", "emadi", "is"}, sentence, kTable)}) ==
        doctest::Approx(expected));
  // Unsmoothed BLEU is zero once any order has no match.
  CHECK(Bleu({Record("a", {"kian", "emadi", "is"}, sentence, kTable)}, 4, BleuSmoothing::kNone) ==
        0.0);
}

TEST_CASE("parent is perfect when outputs equal table-covered references") {
  const Tokens covered = {"kian", "emadi", "track", "kian"};
  const ParentScore s = Parent({Record("a", covered, covered, kTable)});
  CHECK(s.precision == doctest::Approx(1.0));
  CHECK(s.recall == doctest::Approx(1.0));
  CHECK(s.f == doctest::Approx(1.0));
}

TEST_CASE("parent rewards table-supported words absent from the reference") {
  const Tokens reference = {"kian", "is", "a", "cyclist"};
  const double with_table = Parent({Record("a", {"kian", "emadi"}, reference, kTable)}).precision;
  const double without = Parent({Record("a", {"kian", "zzz"}, reference, kTable)}).precision;
  CHECK(with_table > without);
  CHECK(Parent({}).f == 0.0);
  CHECK_THROWS_AS(Parent({Record("a", {"x"}, {"x"}, {})}), Error);
}

TEST_CASE("parent does not depend on record order") {
  std::mt19937_64 rng(4);
  auto records = testing::RandomEvalRecords(rng);
  const ParentScore forward = Parent(records);
  std::reverse(records.begin(), records.end());
  const ParentScore backward = Parent(records);
  CHECK(forward.precision == backward.precision);
  CHECK(forward.recall == backward.recall);
}

TEST_CASE("flesch reading ease") {
  CHECK(std::abs(Flesch({{"cat", "."}}) - 121.22) <= 0.01);
  const std::vector<Tokens> corpus = {{"the", "rider", "was", "born", "in", "1992", "."},
                                      {"she", "is", "a", "british", "track", "cyclist", "."}};
  std::vector<Tokens> doubled = corpus;
  doubled.insert(doubled.end(), corpus.begin(), corpus.end());
  CHECK(Flesch(doubled) == Flesch(corpus));
  CHECK_THROWS_AS(Flesch({{".", ","}}), Error);
  CHECK_THROWS_AS(Flesch({}), Error);
}

TEST_CASE("syllable estimates") {
  CHECK(CountSyllables("cat") == 1);
  CHECK(CountSyllables("cyclist") == 2);
  CHECK(CountSyllables("make") == 1);
  CHECK(CountSyllables("table") == 2);
  CHECK(CountSyllables("british") == 2);
  CHECK(CountSyllables("1992") == 1);
  CHECK(IsPunctuation("."));
  CHECK(IsPunctuation("''"));
  CHECK(!IsPunctuation("a."));
}

TEST_CASE("mean length and hallucination rate") {
  CHECK(MeanLength({{"a", "b"}, {"c"}}) == 1.5);
  CHECK_THROWS_AS(MeanLength({}), Error);

  corpus::Instance output;
  output.id = "o";
  output.table = kTable;
  output.reference.tokens = {{"kian", "PROPN", corpus::kRoot, "root", ""},
                             {"british", "ADJ", 0, "parataxis", ""}};
  const double rate = HallucinationRate({output}, cooccur::CooccurrenceIndex{}, {});
  CHECK(rate == 0.5);
  CHECK_THROWS_AS(HallucinationRate({}, cooccur::CooccurrenceIndex{}, {}), Error);
}

TEST_CASE("report formats") {
  MetricReport r;
  r.bleu = 0.5;
  r.flesch = 121.22;
  const std::string tsv = r.ToTsv();
  CHECK(tsv.find("bleu\t0.500000\n") == 0);
  CHECK(tsv.find("flesch\t121.220000\n") != std::string::npos);
  CHECK(r.ToJson().find("\"parent_f\"") != std::string::npos);
}

}  // namespace
}  // namespace mbdtg::metrics
