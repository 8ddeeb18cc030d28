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

#include "mbdtg/synthetic.h"

#include <array>
#include <random>
#include <string>

namespace mbdtg::corpus {
namespace {

constexpr std::array kFirstNames = {
    "anna", "bruno", "carla", "dario", "elena", "fabio", "greta", "hugo",
    "irene", "jonas", "karla", "luca", "marta", "nils", "olga", "pavel",
    "rosa", "sven", "tina", "ugo", "vera", "willem", "yara", "zeno"};
constexpr std::array kLastNames = {
    "abbott", "brandt", "costa", "dekker", "ekman", "falk", "gallo", "holm",
    "ivanov", "jansen", "kovac", "lund", "moretti", "novak", "olsen", "petrov",
    "quist", "rossi", "sousa", "toth", "ulrich", "vidal", "weber", "zeller"};
constexpr std::array kOccupations = {"cyclist", "painter", "footballer",
                                     "singer", "writer", "architect"};
constexpr std::array kCities = {"lyon", "porto", "malmo", "gdansk", "ghent",
                                "turin", "bergen", "leeds", "brno", "graz"};
constexpr std::array kClubColours = {"red", "blue", "green", "black", "white"};
constexpr std::array kClubAnimals = {"lions", "eagles", "rovers", "united"};
constexpr std::array kMonths = {"january", "february", "march", "april",
                                "may", "june", "july", "august",
                                "september", "october", "november", "december"};
constexpr std::array kNationalities = {"british", "french", "swedish", "polish",
                                       "dutch", "italian", "czech", "danish"};

class Picker {
 public:
  explicit Picker(uint64_t seed) : rng_(seed) {}

  template <typename Array>
  std::string Pick(const Array &items) {
    return items[rng_() % items.size()];
  }
  int Range(int lo, int hi) { return lo + static_cast<int>(rng_() % (hi - lo + 1)); }
  bool Chance(double p) {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p;
  }

 private:
  std::mt19937_64 rng_;
};

// Builds tokens with symbolic heads, resolved to indices once all are placed.
struct Builder {
  struct Pending {
    std::string surface, pos, deprel, head_name, name;
    bool planted = false;
  };
  std::vector<Pending> items;

  void Add(std::string surface, std::string pos, std::string deprel,
           std::string head_name, bool planted, std::string name = "") {
    items.push_back({std::move(surface), std::move(pos), std::move(deprel),
                     std::move(head_name), std::move(name), planted});
  }

  ParsedSentence Build(std::vector<bool> *planted) const {
    ParsedSentence sentence;
    for (const auto &item : items) {
      Token tok;
      tok.surface = item.surface;
      tok.pos = item.pos;
      tok.deprel = item.deprel;
      tok.head = kRoot;
      for (size_t j = 0; j < items.size(); ++j) {
        if (!item.head_name.empty() && items[j].name == item.head_name) {
          tok.head = static_cast<int>(j);
        }
      }
      sentence.tokens.push_back(std::move(tok));
      planted->push_back(item.planted);
    }
    return sentence;
  }
};

}  // namespace

double SyntheticCorpus::PlantedFraction() const {
  size_t total = 0, hallucinated = 0;
  for (const auto &mask : planted) {
    total += mask.size();
    for (bool b : mask) hallucinated += b ? 1 : 0;
  }
  return total == 0 ? 0.0 : static_cast<double>(hallucinated) / total;
}

SyntheticCorpus MakeSyntheticCorpus(const SyntheticOptions &options) {
  SyntheticCorpus out;
  out.corpus.split = Split::kTrain;
  Picker picker(options.seed);
  for (int i = 0; i < options.instances; ++i) {
    const std::string first = picker.Pick(kFirstNames);
    const std::string last = picker.Pick(kLastNames);
    const std::string occupation = picker.Pick(kOccupations);
    const std::string city = picker.Pick(kCities);
    const std::string colour = picker.Pick(kClubColours);
    const std::string animal = picker.Pick(kClubAnimals);
    const bool with_birth = picker.Chance(options.birth_probability);
    const bool with_nationality = picker.Chance(options.nationality_probability);

    Instance inst;
    inst.id = "synth-" + std::to_string(i);
    inst.table.pairs = {{"name", {first, last}},
                        {"occupation", {occupation}},
                        {"birth_place", {city}},
                        {"club", {colour, animal}}};

    Builder b;
    b.Add(first, "PROPN", "nsubj", "occ", false, "first");
    b.Add(last, "PROPN", "flat", "first", false);
    if (with_birth) {
      b.Add("(", "PUNCT", "punct", "born", true);
      b.Add("born", "VERB", "acl", "first", true, "born");
      b.Add(std::to_string(picker.Range(1, 28)), "NUM", "nummod", "month", true);
      b.Add(picker.Pick(kMonths), "PROPN", "obl", "born", true, "month");
      b.Add(std::to_string(picker.Range(1960, 1999)), "NUM", "nummod", "month", true);
      b.Add(")", "PUNCT", "punct", "born", true);
    }
    b.Add("is", "AUX", "cop", "occ", false);
    b.Add("a", "DET", "det", "occ", false);
    if (with_nationality) b.Add(picker.Pick(kNationalities), "ADJ", "amod", "occ", true);
    b.Add(occupation, "NOUN", "root", "", false, "occ");
    b.Add("from", "ADP", "case", "city", false);
    b.Add(city, "PROPN", "nmod", "occ", false, "city");
    b.Add("playing", "VERB", "acl", "occ", false, "plays");
    b.Add("for", "ADP", "case", "club", false);
    b.Add(colour, "PROPN", "compound", "club", false);
    b.Add(animal, "PROPN", "obl", "plays", false, "club");
    b.Add(".", "PUNCT", "punct", "occ", false);

    std::vector<bool> planted;
    inst.reference = b.Build(&planted);
    out.corpus.instances.push_back(std::move(inst));
    out.planted.push_back(std::move(planted));
  }
  return out;
}

}  // namespace mbdtg::corpus
