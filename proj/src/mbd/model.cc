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

#include "mbdtg/mbd/model.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mbdtg/error.h"

namespace mbdtg::mbd {
namespace {

Matrix UniformMatrix(Eigen::Index rows, Eigen::Index cols, double range, std::mt19937_64 &rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m(i, j) = (2.0 * u - 1.0) * range;
    }
  }
  return m;
}

}  // namespace

void ModelConfig::Check() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("model config: ") + what);
  };
  require(vocab_size >= 4, "vocab_size must be >= 4");
  require(embed_dim >= 1 && hidden_dim >= 1 && feature_dim >= 1, "dims must be >= 1");
  require(max_position >= 1, "max_position must be >= 1");
  require(encoder_layers >= 1 && branch_layers >= 1, "layer counts must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(init_range > 0.0, "init_range must be > 0");
}

const std::set<std::string> &ModelConfig::ConfigKeys() {
  static const std::set<std::string> kKeys = {
      "vocab_size",     "embed_dim",     "hidden_dim", "feature_dim", "max_position",
      "encoder_layers", "branch_layers", "branch_count", "dropout",   "init_range", "seed"};
  return kKeys;
}

ModelConfig ModelConfig::FromConfig(const ConfigFile &config) {
  ModelConfig cfg;
  cfg.vocab_size = static_cast<int>(config.GetInt("vocab_size", cfg.vocab_size));
  cfg.embed_dim = static_cast<int>(config.GetInt("embed_dim", cfg.embed_dim));
  cfg.hidden_dim = static_cast<int>(config.GetInt("hidden_dim", cfg.hidden_dim));
  cfg.feature_dim = static_cast<int>(config.GetInt("feature_dim", cfg.feature_dim));
  cfg.max_position = static_cast<int>(config.GetInt("max_position", cfg.max_position));
  cfg.encoder_layers = static_cast<int>(config.GetInt("encoder_layers", cfg.encoder_layers));
  cfg.branch_layers = static_cast<int>(config.GetInt("branch_layers", cfg.branch_layers));
  if (config.GetInt("branch_count", kBranchCount) != kBranchCount) {
    throw Error(ErrorCode::kInvalidArgument, "model config: branch_count is fixed at 3");
  }
  cfg.dropout = config.GetDouble("dropout", cfg.dropout);
  cfg.init_range = config.GetDouble("init_range", cfg.init_range);
  cfg.seed = static_cast<uint64_t>(config.GetInt("seed", static_cast<long>(cfg.seed)));
  cfg.Check();
  return cfg;
}

BranchWeights::BranchWeights(double content, double hallucination, double fluency)
    : omega_{content, hallucination, fluency} {
  Validate(omega_);
}

void BranchWeights::Validate(const std::array<double, kBranchCount> &omega) {
  double sum = 0.0;
  for (double w : omega) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "branch weights must be non-negative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "branch weights must sum to 1");
  }
}

BranchWeights BranchWeights::Parse(const std::string &text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw Error(ErrorCode::kInvalidArgument, "bad branch weights: " + text);
    }
  }
  if (values.size() != kBranchCount) {
    throw Error(ErrorCode::kInvalidArgument, "expected three branch weights: " + text);
  }
  return BranchWeights(values[0], values[1], values[2]);
}

std::string BranchWeights::ToString() const {
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "%.2f,%.2f,%.2f", omega_[0], omega_[1], omega_[2]);
  return buffer;
}

BranchWeights TrainingWeights(int label) {
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::kInvalidArgument, "alignment label must be 0 or 1");
  }
  return label == 1 ? BranchWeights(0.5, 0.0, 0.5) : BranchWeights(0.0, 0.5, 0.5);
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) {
  const std::vector<std::string> specials = {"<unk>", "<bos>", "<eos>"};
  if (words.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), words.begin())) {
    words.insert(words.begin(), specials.begin(), specials.end());
  }
  words_ = std::move(words);
  for (size_t i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], static_cast<int>(i));
}

Vocabulary Vocabulary::BuildWords(const corpus::Corpus &corpus, int max_size) {
  std::map<std::string, long> counts;
  for (const auto &inst : corpus.instances) {
    for (const auto &tok : inst.reference.tokens) ++counts[tok.surface];
    for (const auto &pair : inst.table.pairs) {
      for (const auto &tok : pair.value_tokens) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  std::vector<std::string> words = {"<unk>", "<bos>", "<eos>"};
  for (const auto &[word, count] : ranked) {
    if (static_cast<int>(words.size()) >= max_size) break;
    if (word == "<unk>" || word == "<bos>" || word == "<eos>") continue;
    words.push_back(word);
  }
  return Vocabulary(std::move(words));
}

Vocabulary Vocabulary::BuildKeys(const corpus::Corpus &corpus) {
  std::set<std::string> keys;
  for (const auto &inst : corpus.instances) {
    for (const auto &pair : inst.table.pairs) keys.insert(pair.key);
  }
  std::vector<std::string> words = {"<unk>", "<bos>", "<eos>"};
  words.insert(words.end(), keys.begin(), keys.end());
  return Vocabulary(std::move(words));
}

int Vocabulary::Id(const std::string &word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<SourceUnit> LinearizeTable(const corpus::EntityTable &table) {
  std::vector<SourceUnit> units;
  for (const auto &pair : table.pairs) {
    if (pair.value_tokens.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "linearize: empty value for key " + pair.key);
    }
    for (size_t i = 0; i < pair.value_tokens.size(); ++i) {
      units.push_back(SourceUnit{pair.value_tokens[i], pair.key, static_cast<int>(i) + 1});
    }
  }
  return units;
}

Model::Model(const ModelConfig &config, Vocabulary words, Vocabulary keys)
    : config_(config), words_(std::move(words)), keys_(std::move(keys)) {
  config_.Check();
  if (words_.size() > config_.vocab_size) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary larger than vocab_size");
  }
  std::mt19937_64 rng(config_.seed);
  const int n = config_.embed_dim;
  const int h = config_.hidden_dim;
  const int k = config_.feature_dim;
  auto add = [&](const std::string &name, Eigen::Index rows, Eigen::Index cols) {
    return params_.Add(name, UniformMatrix(rows, cols, config_.init_range, rng));
  };
  auto add_lstm = [&](const std::string &name, int input) {
    LstmParams cell;
    cell.weight = add(name + ".W", 4 * h, input + h);
    cell.bias = add(name + ".b", 4 * h, 1);
    return cell;
  };

  embedding_ = add("embedding", words_.size(), n);
  key_embedding_ = add("key_embedding", keys_.size(), k);
  position_embedding_ = add("position_embedding", config_.max_position, k);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    const int input = l == 0 ? n + 2 * k : 2 * h;
    const std::string prefix = "encoder.l" + std::to_string(l);
    encoder_.push_back({add_lstm(prefix + ".fwd", input), add_lstm(prefix + ".bwd", input)});
  }
  for (int l = 0; l < config_.branch_layers; ++l) {
    const std::string prefix = "init.l" + std::to_string(l);
    init_.push_back(LstmParams{add(prefix + ".W", h, 2 * h), add(prefix + ".b", h, 1)});
  }
  attention_ = add("attention.W", 2 * h, h);
  for (int f = 0; f < kBranchCount; ++f) {
    for (int l = 0; l < config_.branch_layers; ++l) {
      const int input = l == 0 ? n + 2 * h + h : h;
      branches_[f].push_back(
          add_lstm("branch" + std::to_string(f) + ".l" + std::to_string(l), input));
    }
  }
  attn_out_weight_ = add("output.attn.W", h, 3 * h);
  attn_out_bias_ = add("output.attn.b", h, 1);
  vocab_weight_ = add("output.vocab.W", words_.size(), h);
  vocab_bias_ = add("output.vocab.b", words_.size(), 1);
  gate_weight_ = add("gate.W", 1, h + 2 * h + n);
  gate_bias_ = add("gate.b", 1, 1);
}

PreparedSource Model::Prepare(const corpus::EntityTable &table) const {
  PreparedSource source;
  source.units = LinearizeTable(table);
  if (source.units.empty()) throw Error(ErrorCode::kInvalidArgument, "empty source table");
  const int vocab = words_.size();
  for (const auto &unit : source.units) {
    source.token_ids.push_back(words_.Id(unit.token));
    source.key_ids.push_back(keys_.Id(unit.key));
    source.position_ids.push_back(std::min(unit.position, config_.max_position) - 1);
    if (words_.Contains(unit.token)) {
      source.extended_ids.push_back(words_.Id(unit.token));
    } else {
      auto it = std::find(source.oov_words.begin(), source.oov_words.end(), unit.token);
      if (it == source.oov_words.end()) {
        source.oov_words.push_back(unit.token);
        it = source.oov_words.end() - 1;
      }
      source.extended_ids.push_back(vocab + static_cast<int>(it - source.oov_words.begin()));
    }
  }
  return source;
}

int Model::ExtendedId(const std::string &word, const PreparedSource &source) const {
  if (words_.Contains(word)) return words_.Id(word);
  auto it = std::find(source.oov_words.begin(), source.oov_words.end(), word);
  if (it != source.oov_words.end()) {
    return words_.size() + static_cast<int>(it - source.oov_words.begin());
  }
  return Vocabulary::kUnk;
}

std::string Model::ExtendedWord(int id, const PreparedSource &source) const {
  if (id < words_.size()) return words_.Word(id);
  return source.oov_words.at(id - words_.size());
}

int Model::InputId(int extended_id) const {
  return extended_id < words_.size() ? extended_id : Vocabulary::kUnk;
}

TrainingExample Model::MakeExample(const corpus::Instance &inst,
                                   const std::vector<int> &labels) const {
  if (labels.size() != inst.reference.size()) {
    throw Error(ErrorCode::kInvalidArgument, "labels do not match reference length");
  }
  TrainingExample example;
  example.id = inst.id;
  example.source = Prepare(inst.table);
  example.input_ids.push_back(Vocabulary::kBos);
  for (size_t t = 0; t < inst.reference.size(); ++t) {
    const int target = ExtendedId(inst.reference.tokens[t].surface, example.source);
    example.target_ids.push_back(target);
    example.input_ids.push_back(InputId(target));
    example.labels.push_back(labels[t]);
  }
  example.target_ids.push_back(Vocabulary::kEos);
  example.labels.push_back(1);
  return example;
}

Var Model::MaybeDropout(Tape &tape, Var input, const DropoutContext *dropout) const {
  if (dropout == nullptr || dropout->rate <= 0.0 || dropout->rng == nullptr) return input;
  const Matrix &x = tape.value(input);
  Matrix mask(x.rows(), x.cols());
  const double keep = 1.0 - dropout->rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    const double u = static_cast<double>((*dropout->rng)() >> 11) * 0x1.0p-53;
    mask(i) = u < keep ? 1.0 / keep : 0.0;
  }
  return tape.Mul(input, tape.Constant(std::move(mask)));
}

LstmState Model::LstmStep(Tape &tape, const LstmParams &cell, Var input,
                          const LstmState &prev) const {
  const int h = config_.hidden_dim;
  Var z = tape.Add(tape.MatMul(tape.Param(cell.weight), tape.Concat({input, prev.h})),
                   tape.Param(cell.bias));
  Var in_gate = tape.Sigmoid(tape.Slice(z, 0, h));
  Var forget_gate = tape.Sigmoid(tape.Slice(z, h, h));
  Var candidate = tape.Tanh(tape.Slice(z, 2 * h, h));
  Var out_gate = tape.Sigmoid(tape.Slice(z, 3 * h, h));
  Var c = tape.Add(tape.Mul(forget_gate, prev.c), tape.Mul(in_gate, candidate));
  Var hidden = tape.Mul(out_gate, tape.Tanh(c));
  return LstmState{hidden, c};
}

EncoderOutput Model::Encode(Tape &tape, const PreparedSource &source,
                            const DropoutContext *dropout) const {
  const size_t n = source.units.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "encode: empty source");
  const int h = config_.hidden_dim;
  std::vector<Var> layer_input;
  layer_input.reserve(n);
  for (size_t j = 0; j < n; ++j) {
    layer_input.push_back(tape.Concat({tape.Lookup(embedding_, source.token_ids[j]),
                                       tape.Lookup(key_embedding_, source.key_ids[j]),
                                       tape.Lookup(position_embedding_, source.position_ids[j])}));
  }
  Var forward_last{}, backward_first{};
  for (const auto &layer : encoder_) {
    std::vector<Var> forward(n), backward(n);
    LstmState state{tape.Constant(Matrix::Zero(h, 1)), tape.Constant(Matrix::Zero(h, 1))};
    for (size_t j = 0; j < n; ++j) {
      state = LstmStep(tape, layer[0], MaybeDropout(tape, layer_input[j], dropout), state);
      forward[j] = state.h;
    }
    state = LstmState{tape.Constant(Matrix::Zero(h, 1)), tape.Constant(Matrix::Zero(h, 1))};
    for (size_t j = n; j-- > 0;) {
      state = LstmStep(tape, layer[1], MaybeDropout(tape, layer_input[j], dropout), state);
      backward[j] = state.h;
    }
    for (size_t j = 0; j < n; ++j) layer_input[j] = tape.Concat({forward[j], backward[j]});
    forward_last = forward[n - 1];
    backward_first = backward[0];
  }
  EncoderOutput out;
  out.annotations = layer_input;
  out.matrix = tape.HStack(layer_input);
  out.final_state = tape.Concat({forward_last, backward_first});
  return out;
}

DecoderState Model::InitialState(Tape &tape, const EncoderOutput &encoded) const {
  const int h = config_.hidden_dim;
  DecoderState state;
  Var zero = tape.Constant(Matrix::Zero(h, 1));
  for (const auto &layer : init_) {
    Var hidden = tape.Tanh(tape.Add(tape.MatMul(tape.Param(layer.weight), encoded.final_state),
                                    tape.Param(layer.bias)));
    for (auto &branch : state.branches) branch.push_back(LstmState{hidden, zero});
  }
  state.combined = state.branches[0].back().h;
  state.input_feed = zero;
  return state;
}

Attention Model::Attend(Tape &tape, Var query, const EncoderOutput &encoded) const {
  Var projected = tape.MatMul(tape.Param(attention_), query);
  Var scores = tape.Transpose(tape.MatMul(tape.Transpose(projected), encoded.matrix));
  Attention out;
  out.weights = tape.Softmax(scores);
  out.context = tape.MatMul(encoded.matrix, out.weights);
  return out;
}

StepOutput Model::DecodeStep(Tape &tape, int prev_token, const DecoderState &state,
                             const BranchWeights &weights, const EncoderOutput &encoded,
                             const StepOptions &options) const {
  BranchWeights::Validate(weights.values());
  StepOutput out;
  out.attention = Attend(tape, state.combined, encoded);
  Var embedded = tape.Lookup(embedding_, prev_token);
  Var input = tape.Concat({embedded, out.attention.context, state.input_feed});

  out.state.branches = state.branches;
  for (int f = 0; f < kBranchCount; ++f) {
    if (options.single_branch.has_value() && *options.single_branch != f) continue;
    Var layer_input = input;
    for (int l = 0; l < config_.branch_layers; ++l) {
      LstmState next = LstmStep(tape, branches_[f][l],
                                MaybeDropout(tape, layer_input, options.dropout),
                                state.branches[f][l]);
      out.state.branches[f][l] = next;
      layer_input = next.h;
    }
    out.branch_tops[f] = layer_input;
  }

  if (options.single_branch.has_value()) {
    out.state.combined = out.branch_tops[*options.single_branch];
  } else {
    Var combined = tape.Scale(out.branch_tops[0], weights[0]);
    for (int f = 1; f < kBranchCount; ++f) {
      combined = tape.Add(combined, tape.Scale(out.branch_tops[f], weights[f]));
    }
    out.state.combined = combined;
  }

  Var mixed = tape.Concat({out.state.combined, out.attention.context});
  out.state.input_feed = tape.Tanh(
      tape.Add(tape.MatMul(tape.Param(attn_out_weight_), mixed), tape.Param(attn_out_bias_)));
  out.vocab_probs = tape.Softmax(tape.Add(
      tape.MatMul(tape.Param(vocab_weight_), out.state.input_feed), tape.Param(vocab_bias_)));
  if (options.forced_gate.has_value()) {
    out.gate = tape.Constant(Matrix::Constant(1, 1, *options.forced_gate));
  } else {
    Var features = tape.Concat({out.state.combined, out.attention.context, embedded});
    out.gate = tape.Sigmoid(
        tape.Add(tape.MatMul(tape.Param(gate_weight_), features), tape.Param(gate_bias_)));
  }
  return out;
}

Var Model::TokenProbability(Tape &tape, const StepOutput &step, const PreparedSource &source,
                            int extended_id) const {
  const int n = static_cast<int>(source.extended_ids.size());
  Matrix mask = Matrix::Zero(1, n);
  for (int j = 0; j < n; ++j) mask(0, j) = source.extended_ids[j] == extended_id ? 1.0 : 0.0;
  Var copy = tape.MatMul(tape.Constant(std::move(mask)), step.attention.weights);
  Var copy_part = tape.ScaleBy(copy, tape.Affine(step.gate, -1.0, 1.0));
  if (extended_id >= words_.size()) return copy_part;
  Var generate = tape.ScaleBy(tape.Pick(step.vocab_probs, extended_id), step.gate);
  return tape.Add(generate, copy_part);
}

Vector Model::Distribution(const Tape &tape, const StepOutput &step,
                           const PreparedSource &source) const {
  const int vocab = words_.size();
  const double gate = tape.scalar(step.gate);
  Vector dist = Vector::Zero(source.ExtendedSize(vocab));
  dist.head(vocab) = gate * tape.value(step.vocab_probs).col(0);
  const Matrix &attention = tape.value(step.attention.weights);
  for (size_t j = 0; j < source.extended_ids.size(); ++j) {
    dist(source.extended_ids[j]) += (1.0 - gate) * attention(static_cast<Eigen::Index>(j), 0);
  }
  return dist;
}

Var Model::SequenceLoss(Tape &tape, const TrainingExample &example, const DropoutContext *dropout,
                        const std::optional<BranchWeights> &fixed,
                        const StepOptions &options) const {
  EncoderOutput encoded = Encode(tape, example.source, dropout);
  DecoderState state = InitialState(tape, encoded);
  StepOptions step_options = options;
  step_options.dropout = dropout;
  Var total{};
  for (size_t t = 0; t < example.target_ids.size(); ++t) {
    const BranchWeights weights = fixed.has_value() ? *fixed : TrainingWeights(example.labels[t]);
    StepOutput step =
        DecodeStep(tape, example.input_ids[t], state, weights, encoded, step_options);
    Var nll = tape.Scale(
        tape.Log(TokenProbability(tape, step, example.source, example.target_ids[t])), -1.0);
    total = t == 0 ? nll : tape.Add(total, nll);
    state = step.state;
  }
  return total;
}

}  // namespace mbdtg::mbd
