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

#ifndef MBDTG_MBD_TRAIN_H_
#define MBDTG_MBD_TRAIN_H_

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mbdtg/config_file.h"
#include "mbdtg/mbd/model.h"

namespace mbdtg::mbd {

struct TrainSchedule {
  int steps = 2000;
  int batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // The rate halves at decay_start and every decay_every steps after it.
  int decay_start = 250;
  int decay_every = 500;
  double clip_norm = 5.0;
  int threads = 1;
  uint64_t seed = 1;

  void Check() const;
  static TrainSchedule FromConfig(const ConfigFile &config);
  static const std::set<std::string> &ConfigKeys();
};

// Learning rate in effect at 0-based `step`.
double LearningRate(const TrainSchedule &schedule, int step);

// SplitMix64 finalizer over a combined key; used to derive per-step streams.
uint64_t MixSeed(uint64_t seed, uint64_t step, uint64_t slot);

struct TrainResult {
  std::vector<double> losses;  // mean token NLL of each step's minibatch
};

// Mean token negative log-likelihood over `examples`, without dropout.
double MeanTokenLoss(const Model &model, const std::vector<TrainingExample> &examples);

// Adam with bias correction, global-norm clipping and step decay. Minibatches
// are drawn from per-epoch shuffles; with threads > 1 the per-instance
// gradients are summed in batch order, so results do not depend on threads.
// Throws Error(kNumeric) on a non-finite loss.
TrainResult Train(Model &model, const std::vector<TrainingExample> &examples,
                  const TrainSchedule &schedule,
                  const std::function<void(int step, double loss)> &progress = {});

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_TRAIN_H_
