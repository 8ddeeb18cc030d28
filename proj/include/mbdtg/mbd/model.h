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

#ifndef MBDTG_MBD_MODEL_H_
#define MBDTG_MBD_MODEL_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mbdtg/config_file.h"
#include "mbdtg/corpus.h"
#include "mbdtg/mbd/autodiff.h"

namespace mbdtg::mbd {

inline constexpr int kBranchCount = 3;
enum Branch { kContent = 0, kHallucination = 1, kFluency = 2 };

struct ModelConfig {
  int vocab_size = 2000;
  int embed_dim = 64;
  int hidden_dim = 64;
  int feature_dim = 16;  // key and position embeddings of source units
  int max_position = 32;
  int encoder_layers = 2;
  int branch_layers = 2;
  double dropout = 0.3;
  double init_range = 0.1;  // parameters start uniform in [-init_range, init_range]
  uint64_t seed = 1;

  void Check() const;
  static ModelConfig FromConfig(const ConfigFile &config);
  static const std::set<std::string> &ConfigKeys();
};

// Convex mixing weights (content, hallucination, fluency).
class BranchWeights {
 public:
  static constexpr double kTolerance = 1e-9;

  // Throws Error(kInvalidArgument) for negative weights or a sum off by more
  // than kTolerance.
  BranchWeights(double content, double hallucination, double fluency);

  // Parses "w0,w1,w2".
  static BranchWeights Parse(const std::string &text);

  double operator[](int branch) const { return omega_[branch]; }
  const std::array<double, kBranchCount> &values() const { return omega_; }
  std::string ToString() const;

  static void Validate(const std::array<double, kBranchCount> &omega);

 private:
  std::array<double, kBranchCount> omega_;
};

// Training-time switch: label 1 -> (0.5, 0, 0.5), label 0 -> (0, 0.5, 0.5).
BranchWeights TrainingWeights(int label);

// Frequency-ranked word list with reserved <unk>, <bos>, <eos>.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> words);

  // Counts reference tokens and table values; ties broken alphabetically.
  static Vocabulary BuildWords(const corpus::Corpus &corpus, int max_size);
  // Every table key, sorted, after <unk>.
  static Vocabulary BuildKeys(const corpus::Corpus &corpus);

  int Id(const std::string &word) const;  // kUnk when absent
  bool Contains(const std::string &word) const { return ids_.count(word) > 0; }
  const std::string &Word(int id) const { return words_.at(id); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string> &words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

// One encoder input: a value token with its key and 1-based position.
struct SourceUnit {
  std::string token;
  std::string key;
  int position = 1;

  bool operator==(const SourceUnit &) const = default;
};

std::vector<SourceUnit> LinearizeTable(const corpus::EntityTable &table);

// A table ready for the network, with the per-instance extended vocabulary
// used by the copy distribution: ids >= vocab size name source-only words.
struct PreparedSource {
  std::vector<SourceUnit> units;
  std::vector<int> token_ids;
  std::vector<int> key_ids;
  std::vector<int> position_ids;
  std::vector<int> extended_ids;       // per unit
  std::vector<std::string> oov_words;  // extended id = vocab size + index

  int ExtendedSize(int vocab_size) const {
    return vocab_size + static_cast<int>(oov_words.size());
  }
};

// Target side for teacher forcing; the sequence ends with <eos>.
struct TrainingExample {
  std::string id;
  PreparedSource source;
  std::vector<int> input_ids;   // previous-token ids, starting with <bos>
  std::vector<int> target_ids;  // extended ids
  std::vector<int> labels;      // alignment label per target position
};

struct EncoderOutput {
  std::vector<Var> annotations;  // one 2*hidden vector per source unit
  Var matrix;                    // annotations as columns
  Var final_state;               // [forward last; backward first], 2*hidden
};

struct LstmState {
  Var h;
  Var c;
};

struct DecoderState {
  // branches[f][layer]
  std::array<std::vector<LstmState>, kBranchCount> branches;
  Var combined;    // sum_f omega_f * top hidden of branch f
  Var input_feed;  // previous attentional vector
};

struct Attention {
  Var weights;  // distribution over source positions
  Var context;
};

// Dropout is applied only when a context is supplied.
struct DropoutContext {
  double rate = 0.0;
  std::mt19937_64 *rng = nullptr;
};

struct StepOptions {
  std::optional<double> forced_gate;  // overrides p_gen
  std::optional<int> single_branch;   // run only this branch as the decoder
  const DropoutContext *dropout = nullptr;
};

struct StepOutput {
  DecoderState state;
  Attention attention;
  Var vocab_probs;  // softmax over the fixed vocabulary
  Var gate;         // p_gen, 1x1
  std::array<Var, kBranchCount> branch_tops;
};

// Desk-scale encoder-decoder: embedding + bidirectional LSTM encoder, general
// attention with input feeding, F = 3 LSTM branches mixed by weights, and a
// pointer-generator output layer.
class Model {
 public:
  Model(const ModelConfig &config, Vocabulary words, Vocabulary keys);

  const ModelConfig &config() const { return config_; }
  const Vocabulary &words() const { return words_; }
  const Vocabulary &keys() const { return keys_; }
  ParameterStore &params() { return params_; }
  const ParameterStore &params() const { return params_; }

  PreparedSource Prepare(const corpus::EntityTable &table) const;
  TrainingExample MakeExample(const corpus::Instance &inst, const std::vector<int> &labels) const;
  int ExtendedId(const std::string &word, const PreparedSource &source) const;
  std::string ExtendedWord(int id, const PreparedSource &source) const;
  int InputId(int extended_id) const;

  EncoderOutput Encode(Tape &tape, const PreparedSource &source,
                       const DropoutContext *dropout = nullptr) const;
  DecoderState InitialState(Tape &tape, const EncoderOutput &encoded) const;
  Attention Attend(Tape &tape, Var query, const EncoderOutput &encoded) const;
  StepOutput DecodeStep(Tape &tape, int prev_token, const DecoderState &state,
                        const BranchWeights &weights, const EncoderOutput &encoded,
                        const StepOptions &options = {}) const;

  // Probability of `extended_id` as a 1x1 node: p_gen * P_vocab + (1 - p_gen) * copy.
  Var TokenProbability(Tape &tape, const StepOutput &step, const PreparedSource &source,
                       int extended_id) const;
  // Full distribution over the extended vocabulary (values only).
  Vector Distribution(const Tape &tape, const StepOutput &step,
                      const PreparedSource &source) const;

  // Teacher-forced negative log-likelihood summed over target positions.
  // Branch weights follow TrainingWeights(labels[t]) unless `fixed` is given.
  Var SequenceLoss(Tape &tape, const TrainingExample &example,
                   const DropoutContext *dropout = nullptr,
                   const std::optional<BranchWeights> &fixed = std::nullopt,
                   const StepOptions &options = {}) const;

 private:
  struct LstmParams {
    int weight = -1;
    int bias = -1;
  };

  LstmState LstmStep(Tape &tape, const LstmParams &cell, Var input, const LstmState &prev) const;
  Var MaybeDropout(Tape &tape, Var input, const DropoutContext *dropout) const;

  ModelConfig config_;
  Vocabulary words_;
  Vocabulary keys_;
  ParameterStore params_;

  int embedding_ = -1;
  int key_embedding_ = -1;
  int position_embedding_ = -1;
  // encoder_[layer][direction]
  std::vector<std::array<LstmParams, 2>> encoder_;
  std::vector<LstmParams> init_;  // per decoder layer, shared by branches
  int attention_ = -1;
  std::array<std::vector<LstmParams>, kBranchCount> branches_;
  int attn_out_weight_ = -1;
  int attn_out_bias_ = -1;
  int vocab_weight_ = -1;
  int vocab_bias_ = -1;
  int gate_weight_ = -1;
  int gate_bias_ = -1;
};

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_MODEL_H_
