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

#ifndef MBDTG_MBD_GRADCHECK_H_
#define MBDTG_MBD_GRADCHECK_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mbdtg/mbd/autodiff.h"
#include "mbdtg/mbd/model.h"

namespace mbdtg::mbd {

struct GradCheckOptions {
  double step = 1e-5;
  // Corrupts the analytic gradient of one op kind.
  std::optional<OpKind> fault;
};

struct GradCheckResult {
  // max over tensors of |analytic - numeric| / (|analytic| + |numeric|),
  // norms taken over the whole tensor; 0 when nothing is trainable.
  double max_relative_error = 0.0;
  std::vector<std::pair<std::string, double>> per_tensor;
};

// Central differences of the teacher-forced sequence loss (no dropout)
// against the tape gradient, for every trainable tensor of `model`.
GradCheckResult GradientCheck(Model &model, const TrainingExample &example,
                              const GradCheckOptions &options = {});

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_GRADCHECK_H_
