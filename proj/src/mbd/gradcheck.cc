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

#include "mbdtg/mbd/gradcheck.h"

#include <algorithm>
#include <limits>

namespace mbdtg::mbd {

GradCheckResult GradientCheck(Model &model, const TrainingExample &example,
                              const GradCheckOptions &options) {
  ParameterStore &params = model.params();
  std::vector<Matrix> analytic = params.ZeroGradients();
  {
    Tape tape(&params, &analytic);
    tape.set_fault(options.fault);
    tape.Backward(model.SequenceLoss(tape, example));
  }
  auto loss = [&]() {
    Tape tape(&params, nullptr);
    return tape.scalar(model.SequenceLoss(tape, example));
  };

  GradCheckResult result;
  for (size_t p = 0; p < params.size(); ++p) {
    Parameter &param = params.at(static_cast<int>(p));
    if (!param.trainable) continue;
    Matrix numeric(param.value.rows(), param.value.cols());
    for (Eigen::Index i = 0; i < param.value.size(); ++i) {
      const double saved = param.value(i);
      param.value(i) = saved + options.step;
      const double plus = loss();
      param.value(i) = saved - options.step;
      const double minus = loss();
      param.value(i) = saved;
      numeric(i) = (plus - minus) / (2.0 * options.step);
    }
    const double denominator = analytic[p].norm() + numeric.norm();
    const double error = denominator < std::numeric_limits<double>::min()
                             ? 0.0
                             : (analytic[p] - numeric).norm() / denominator;
    result.per_tensor.emplace_back(param.name, error);
    result.max_relative_error = std::max(result.max_relative_error, error);
  }
  return result;
}

}  // namespace mbdtg::mbd
