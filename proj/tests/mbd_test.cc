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
#include <cstring>
#include <set>

#include "doctest.h"
#include "mbdtg/checksum.h"
#include "mbdtg/error.h"
#include "mbdtg/mbd/checkpoint.h"
#include "mbdtg/mbd/generate.h"
#include "mbdtg/mbd/gradcheck.h"
#include "mbdtg/mbd/model.h"
#include "mbdtg/mbd/train.h"
#include "mbdtg/synthetic.h"

namespace mbdtg::mbd {
namespace {

corpus::EntityTable Fig1Table() {
  return corpus::EntityTable{{{"name", {"kian", "emadi"}},
                              {"fullname", {"kian", "emadi-coffin"}},
                              {"currentteam", {"retired"}},
                              {"discipline", {"track"}},
                              {"role", {"rider"}},
                              {"ridertype", {"sprinter"}},
                              {"proyears", {"2012-present"}},
                              {"proteams", {"sky", "track", "cycling"}}}};
}

ModelConfig SmallConfig() {
  ModelConfig mc;
  mc.embed_dim = 8;
  mc.hidden_dim = 7;
  mc.feature_dim = 3;
  mc.max_position = 4;
  mc.dropout = 0.0;
  return mc;
}

const corpus::SyntheticCorpus &Synthetic() {
  static const corpus::SyntheticCorpus syn = corpus::MakeSyntheticCorpus({.instances = 12});
  return syn;
}

Model SmallModel(int vocab = 40, double dropout = 0.0) {
  const auto &c = Synthetic().corpus;
  ModelConfig mc = SmallConfig();
  mc.dropout = dropout;
  return Model(mc, Vocabulary::BuildWords(c, vocab), Vocabulary::BuildKeys(c));
}

std::vector<TrainingExample> Examples(const Model &model) {
  std::vector<TrainingExample> out;
  const auto &syn = Synthetic();
  for (size_t i = 0; i < syn.corpus.size(); ++i) {
    std::vector<int> labels;
    for (bool planted : syn.planted[i]) labels.push_back(planted ? 0 : 1);
    out.push_back(model.MakeExample(syn.corpus.instances[i], labels));
  }
  return out;
}

bool BitwiseEqual(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(a.data() + i, b.data() + i, sizeof(double)) != 0) return false;
  }
  return true;
}

TEST_CASE("linearization keeps table order with 1-based positions per field") {
  const auto units = LinearizeTable(Fig1Table());
  REQUIRE(units.size() == 12);
  CHECK(units[0] == SourceUnit{"kian", "name", 1});
  CHECK(units[1] == SourceUnit{"emadi", "name", 2});
  CHECK(units[3] == SourceUnit{"emadi-coffin", "fullname", 2});
  CHECK(units[11] == SourceUnit{"cycling", "proteams", 3});
}

TEST_CASE("vocabulary ranks by frequency then alphabetically") {
  corpus::Corpus c;
  c.instances.push_back({"a", {{{"k", {"b", "a"}}}}, corpus::IdentityParse({"a", "c"}, {}, {})});
  const Vocabulary v = Vocabulary::BuildWords(c, 10);
  REQUIRE(v.size() == 6);
  CHECK(v.Word(Vocabulary::kUnk) == "<unk>");
  CHECK(v.Word(Vocabulary::kEos) == "<eos>");
  CHECK(v.Word(3) == "a");
  CHECK(v.Word(4) == "b");
  CHECK(v.Word(5) == "c");
  CHECK(v.Id("zzz") == Vocabulary::kUnk);
  CHECK(Vocabulary::BuildWords(c, 4).size() == 4);
}

TEST_CASE("encoder and attention shapes") {
  const Model model = SmallModel();
  Tape tape(&model.params(), nullptr);
  const PreparedSource source = model.Prepare(Fig1Table());
  const EncoderOutput enc = model.Encode(tape, source);
  REQUIRE(enc.annotations.size() == 12);
  CHECK(tape.value(enc.annotations[0]).rows() == 14);
  CHECK(tape.value(enc.matrix).cols() == 12);
  CHECK(tape.value(enc.final_state).rows() == 14);
  // Out-of-vocabulary source words get extended ids past the vocabulary.
  CHECK(source.ExtendedSize(model.words().size()) > model.words().size());
  CHECK(model.ExtendedWord(model.ExtendedId("emadi-coffin", source), source) == "emadi-coffin");
  CHECK(model.InputId(model.ExtendedId("emadi-coffin", source)) == Vocabulary::kUnk);

  const DecoderState init = model.InitialState(tape, enc);
  const Attention att = model.Attend(tape, init.combined, enc);
  CHECK(tape.value(att.weights).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tape.value(att.weights).minCoeff() >= 0.0);
  CHECK(tape.value(att.context).rows() == 14);

  // A single source unit receives all attention.
  const PreparedSource one = model.Prepare(corpus::EntityTable{{{"name", {"kian"}}}});
  const EncoderOutput enc1 = model.Encode(tape, one);
  const Attention att1 = model.Attend(tape, model.InitialState(tape, enc1).combined, enc1);
  CHECK(tape.value(att1.weights)(0, 0) == 1.0);
}

TEST_CASE("one-hot weights collapse to the single-branch decoder bitwise") {
  const Model model = SmallModel();
  const PreparedSource source = model.Prepare(Synthetic().corpus.instances[0].table);
  for (int f = 0; f < kBranchCount; ++f) {
    std::array<double, kBranchCount> w{0.0, 0.0, 0.0};
    w[f] = 1.0;
    const BranchWeights one_hot(w[0], w[1], w[2]);
    Tape tape(&model.params(), nullptr);
    const EncoderOutput enc = model.Encode(tape, source);
    DecoderState mixed = model.InitialState(tape, enc);
    DecoderState single = mixed;
    int prev = Vocabulary::kBos;
    for (int t = 0; t < 6; ++t) {
      const StepOutput a = model.DecodeStep(tape, prev, mixed, one_hot, enc);
      StepOptions options;
      options.single_branch = f;
      const StepOutput b = model.DecodeStep(tape, prev, single, one_hot, enc, options);
      CHECK(BitwiseEqual(tape.value(a.state.combined), tape.value(b.state.combined)));
      const Vector pa = model.Distribution(tape, a, source);
      const Vector pb = model.Distribution(tape, b, source);
      CHECK(BitwiseEqual(pa, pb));
      Eigen::Index next = 0;
      pa.maxCoeff(&next);
      prev = model.InputId(static_cast<int>(next));
      mixed = a.state;
      single = b.state;
    }
  }
}

TEST_CASE("equal weights average the branch tops") {
  const Model model = SmallModel();
  const PreparedSource source = model.Prepare(Fig1Table());
  Tape tape(&model.params(), nullptr);
  const EncoderOutput enc = model.Encode(tape, source);
  const double third = 1.0 / 3.0;
  const BranchWeights equal(third, third, 1.0 - 2.0 * third);
  const StepOutput s =
      model.DecodeStep(tape, Vocabulary::kBos, model.InitialState(tape, enc), equal, enc);
  const Matrix mean = (tape.value(s.branch_tops[0]) + tape.value(s.branch_tops[1]) +
                       tape.value(s.branch_tops[2])) /
                      3.0;
  CHECK((tape.value(s.state.combined) - mean).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("branch weights are validated") {
  CHECK_THROWS_AS(BranchWeights(-0.1, 0.6, 0.5), Error);
  CHECK_THROWS_AS(BranchWeights(0.5, 0.5, 0.5), Error);
  CHECK_NOTHROW(BranchWeights(0.5, 0.0, 0.5 + 0.5e-9));
  CHECK_THROWS_AS(BranchWeights::Parse("0.5,0.5"), Error);
  CHECK_THROWS_AS(BranchWeights::Parse("a,b,c"), Error);
  CHECK(BranchWeights::Parse("0.2,0.3,0.5").ToString() == "0.20,0.30,0.50");
  CHECK(TrainingWeights(1).values() == std::array<double, 3>{0.5, 0.0, 0.5});
  CHECK(TrainingWeights(0).values() == std::array<double, 3>{0.0, 0.5, 0.5});
}

TEST_CASE("output distribution is normalized and the gate controls copying") {
  const Model model = SmallModel(20);
  const PreparedSource source = model.Prepare(Fig1Table());
  Tape tape(&model.params(), nullptr);
  const EncoderOutput enc = model.Encode(tape, source);
  const DecoderState init = model.InitialState(tape, enc);
  const BranchWeights w(0.5, 0.0, 0.5);
  const StepOutput free = model.DecodeStep(tape, Vocabulary::kBos, init, w, enc);
  const Vector p = model.Distribution(tape, free, source);
  CHECK(p.size() == source.ExtendedSize(model.words().size()));
  CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  CHECK(p.minCoeff() >= 0.0);

  StepOptions copy_only;
  copy_only.forced_gate = 0.0;
  const StepOutput copied = model.DecodeStep(tape, Vocabulary::kBos, init, w, enc, copy_only);
  const Vector q = model.Distribution(tape, copied, source);
  const std::set<int> source_ids(source.extended_ids.begin(), source.extended_ids.end());
  double on_source = 0.0;
  for (int id : source_ids) on_source += q(id);
  CHECK(std::abs(on_source - 1.0) <= 1e-12);
  const int probe = *source_ids.begin();
  CHECK(tape.value(model.TokenProbability(tape, copied, source, probe))(0, 0) ==
        doctest::Approx(q(probe)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  const auto &syn = Synthetic();
  corpus::Corpus one;
  one.instances = {syn.corpus.instances[0]};
  ModelConfig mc;
  mc.embed_dim = 6;
  mc.hidden_dim = 5;
  mc.feature_dim = 3;
  mc.max_position = 4;
  mc.dropout = 0.0;
  mc.init_range = 0.5;
  Model model(mc, Vocabulary::BuildWords(one, 12), Vocabulary::BuildKeys(one));
  corpus::Instance inst = one.instances[0];
  inst.reference.tokens.resize(5);
  const TrainingExample ex = model.MakeExample(inst, {1, 0, 1, 0, 1});
  const GradCheckResult ok = GradientCheck(model, ex);
  CHECK(ok.max_relative_error <= 1e-4);
  CHECK(ok.per_tensor.size() == model.params().size());
  // A corrupted tanh derivative must be caught.
  GradCheckOptions broken;
  broken.fault = OpKind::kTanh;
  CHECK(GradientCheck(model, ex, broken).max_relative_error > 1e-1);
}

TEST_CASE("an untrained model is close to uniform") {
  const auto &c = Synthetic().corpus;
  ModelConfig mc;  // default dimensions
  Model model(mc, Vocabulary::BuildWords(c, 2000), Vocabulary::BuildKeys(c));
  const double loss = MeanTokenLoss(model, Examples(model));
  const double uniform = std::log(static_cast<double>(model.words().size()));
  CHECK(std::abs(loss - uniform) <= 0.2 * uniform);
}

TEST_CASE("beam search with one beam is greedy decoding") {
  const Model model = SmallModel();
  for (const auto &inst : Synthetic().corpus.instances) {
    for (const BranchWeights &w : {BranchWeights(0.5, 0.0, 0.5), BranchWeights(0.0, 0.5, 0.5)}) {
      const Generation beam = Generate(model, inst.table, w, {.beam_size = 1, .max_len = 12});
      const Generation greedy = GreedyDecode(model, inst.table, w, 12);
      CHECK(beam.tokens == greedy.tokens);
      CHECK(beam.finished == greedy.finished);
      CHECK(beam.score == doctest::Approx(greedy.score).epsilon(1e-12));
      CHECK(beam.tokens.size() <= 12);
    }
  }
  CHECK_THROWS_AS(Generate(model, Fig1Table(), TrainingWeights(1), {.beam_size = 0}), Error);
}

TEST_CASE("learning rate schedule halves in steps") {
  TrainSchedule s;
  s.learning_rate = 1.0;
  s.decay_start = 10;
  s.decay_every = 5;
  CHECK(LearningRate(s, 0) == 1.0);
  CHECK(LearningRate(s, 4) == 1.0);
  CHECK(LearningRate(s, 9) == 1.0);
  CHECK(LearningRate(s, 10) == 0.5);
  CHECK(LearningRate(s, 14) == 0.5);
  CHECK(LearningRate(s, 15) == 0.25);
  CHECK(MixSeed(1, 2, 3) == MixSeed(1, 2, 3));
  CHECK(MixSeed(1, 2, 3) != MixSeed(1, 3, 2));
}

TEST_CASE("training is deterministic and independent of thread count") {
  TrainSchedule s;
  s.steps = 6;
  s.batch_size = 4;
  // Dropout on, so the per-instance random streams are exercised.
  Model a = SmallModel(40, 0.3);
  Model b = SmallModel(40, 0.3);
  Model c = SmallModel(40, 0.3);
  const auto ex = Examples(a);
  const TrainResult ra = Train(a, ex, s);
  const TrainResult rb = Train(b, ex, s);
  s.threads = 3;
  const TrainResult rc = Train(c, ex, s);
  CHECK(ra.losses.size() == 6);
  CHECK(ra.losses == rb.losses);
  CHECK(ra.losses == rc.losses);
  CHECK(SerializeCheckpoint(a) == SerializeCheckpoint(b));
  CHECK(SerializeCheckpoint(a) == SerializeCheckpoint(c));
  CHECK(ra.losses.back() < ra.losses.front());
}

TEST_CASE("checkpoints round-trip and reject damage") {
  Model model = SmallModel();
  TrainSchedule s;
  s.steps = 2;
  Train(model, Examples(model), s);
  const std::string bytes = SerializeCheckpoint(model);
  const auto loaded = ParseCheckpoint(bytes);
  CHECK(SerializeCheckpoint(*loaded) == bytes);
  CHECK(loaded->config().init_range == model.config().init_range);
  const Generation g1 = Generate(model, Fig1Table(), TrainingWeights(1), {3, 10});
  const Generation g2 = Generate(*loaded, Fig1Table(), TrainingWeights(1), {3, 10});
  CHECK(g1.tokens == g2.tokens);
  CHECK(g1.score == g2.score);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x01;
  try {
    ParseCheckpoint(flipped);
    FAIL("damaged checkpoint accepted");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kChecksum);
  }

  // A future version with a valid checksum is refused by version.
  std::string future = bytes.substr(0, bytes.size() - 64);
  future[9] = 2;
  future += Sha256Hex(future);
  try {
    ParseCheckpoint(future);
    FAIL("future version accepted");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kVersion);
  }
  CHECK_THROWS_AS(LoadCheckpoint("/nonexistent/model.ckpt"), Error);
}

}  // namespace
}  // namespace mbdtg::mbd
