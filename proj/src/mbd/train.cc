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

#include "mbdtg/mbd/train.h"

#include <cmath>
#include <random>
#include <thread>

#include "mbdtg/error.h"

namespace mbdtg::mbd {

void TrainSchedule::Check() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("train schedule: ") + what);
  };
  require(steps >= 0, "steps must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(decay_start >= 0 && decay_every >= 1, "bad decay schedule");
  require(clip_norm > 0.0, "clip_norm must be > 0");
  require(threads >= 1, "threads must be >= 1");
}

const std::set<std::string> &TrainSchedule::ConfigKeys() {
  static const std::set<std::string> kKeys = {
      "steps",       "batch_size",  "learning_rate", "beta1",   "beta2",
      "epsilon",     "decay_start", "decay_every",   "clip_norm"};
  return kKeys;
}

TrainSchedule TrainSchedule::FromConfig(const ConfigFile &config) {
  TrainSchedule s;
  s.steps = static_cast<int>(config.GetInt("steps", s.steps));
  s.batch_size = static_cast<int>(config.GetInt("batch_size", s.batch_size));
  s.learning_rate = config.GetDouble("learning_rate", s.learning_rate);
  s.beta1 = config.GetDouble("beta1", s.beta1);
  s.beta2 = config.GetDouble("beta2", s.beta2);
  s.epsilon = config.GetDouble("epsilon", s.epsilon);
  s.decay_start = static_cast<int>(config.GetInt("decay_start", s.decay_start));
  s.decay_every = static_cast<int>(config.GetInt("decay_every", s.decay_every));
  s.clip_norm = config.GetDouble("clip_norm", s.clip_norm);
  s.Check();
  return s;
}

double LearningRate(const TrainSchedule &schedule, int step) {
  const int past = step - schedule.decay_start + schedule.decay_every;
  const int halvings = past > 0 ? past / schedule.decay_every : 0;
  return schedule.learning_rate * std::pow(0.5, halvings);
}

uint64_t MixSeed(uint64_t seed, uint64_t step, uint64_t slot) {
  uint64_t z = seed * 0x9e3779b97f4a7c15ULL ^ (step + 0x632be59bd9b4e019ULL) * 0xbf58476d1ce4e5b9ULL ^
               (slot + 1) * 0x94d049bb133111ebULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double MeanTokenLoss(const Model &model, const std::vector<TrainingExample> &examples) {
  if (examples.empty()) throw Error(ErrorCode::kInvalidArgument, "loss: no examples");
  double total = 0.0;
  size_t tokens = 0;
  for (const auto &example : examples) {
    Tape tape(&model.params(), nullptr);
    total += tape.scalar(model.SequenceLoss(tape, example));
    tokens += example.target_ids.size();
  }
  return total / static_cast<double>(tokens);
}

namespace {

struct InstanceGradient {
  std::vector<Matrix> gradients;
  double loss = 0.0;
};

void ForwardBackward(const Model &model, const TrainingExample &example, uint64_t stream_seed,
                     InstanceGradient *out) {
  std::mt19937_64 rng(stream_seed);
  DropoutContext dropout{model.config().dropout, &rng};
  out->gradients = model.params().ZeroGradients();
  Tape tape(&model.params(), &out->gradients);
  Var loss = model.SequenceLoss(tape, example, &dropout);
  out->loss = tape.scalar(loss);
  if (std::isfinite(out->loss)) tape.Backward(loss);
}

}  // namespace

TrainResult Train(Model &model, const std::vector<TrainingExample> &examples,
                  const TrainSchedule &schedule,
                  const std::function<void(int step, double loss)> &progress) {
  schedule.Check();
  if (examples.empty()) throw Error(ErrorCode::kInvalidArgument, "train: empty corpus");
  ParameterStore &params = model.params();
  std::vector<Matrix> first = params.ZeroGradients();
  std::vector<Matrix> second = params.ZeroGradients();
  const size_t batch = std::min<size_t>(schedule.batch_size, examples.size());

  std::mt19937_64 order_rng(MixSeed(schedule.seed, 0, 0));
  std::vector<size_t> order(examples.size());
  size_t cursor = order.size();
  auto next_index = [&]() {
    if (cursor == order.size()) {
      for (size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[order_rng() % i]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  TrainResult result;
  std::vector<InstanceGradient> slots(batch);
  for (int step = 0; step < schedule.steps; ++step) {
    std::vector<size_t> members(batch);
    for (auto &m : members) m = next_index();

    const size_t workers = std::min<size_t>(schedule.threads, batch);
    auto work = [&](size_t w) {
      for (size_t b = w; b < batch; b += workers) {
        ForwardBackward(model, examples[members[b]], MixSeed(schedule.seed, step + 1, b),
                        &slots[b]);
      }
    };
    if (workers <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto &t : pool) t.join();
    }

    double loss = 0.0;
    size_t tokens = 0;
    std::vector<Matrix> grads = params.ZeroGradients();
    for (size_t b = 0; b < batch; ++b) {
      if (!std::isfinite(slots[b].loss)) {
        throw Error(ErrorCode::kNumeric, "non-finite loss at step " + std::to_string(step) +
                                             " on instance '" + examples[members[b]].id + "'");
      }
      loss += slots[b].loss;
      tokens += examples[members[b]].target_ids.size();
      for (size_t p = 0; p < grads.size(); ++p) grads[p] += slots[b].gradients[p];
    }
    const double scale = 1.0 / static_cast<double>(tokens);
    double norm_sq = 0.0;
    for (size_t p = 0; p < grads.size(); ++p) {
      if (!params.at(static_cast<int>(p)).trainable) continue;
      grads[p] *= scale;
      norm_sq += grads[p].squaredNorm();
    }
    const double norm = std::sqrt(norm_sq);
    if (!std::isfinite(norm)) {
      throw Error(ErrorCode::kNumeric, "non-finite gradient at step " + std::to_string(step));
    }
    const double clip = norm > schedule.clip_norm ? schedule.clip_norm / norm : 1.0;

    const double lr = LearningRate(schedule, step);
    const double correction1 = 1.0 - std::pow(schedule.beta1, step + 1);
    const double correction2 = 1.0 - std::pow(schedule.beta2, step + 1);
    for (size_t p = 0; p < grads.size(); ++p) {
      Parameter &param = params.at(static_cast<int>(p));
      if (!param.trainable) continue;
      const Matrix g = clip * grads[p];
      first[p] = schedule.beta1 * first[p] + (1.0 - schedule.beta1) * g;
      second[p] = schedule.beta2 * second[p] + (1.0 - schedule.beta2) * g.cwiseAbs2();
      param.value.array() -= lr * (first[p].array() / correction1) /
                             ((second[p].array() / correction2).sqrt() + schedule.epsilon);
    }
    result.losses.push_back(loss * scale);
    if (progress) progress(step, loss * scale);
  }
  return result;
}

}  // namespace mbdtg::mbd
