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

#ifndef MBDTG_MBD_CHECKPOINT_H_
#define MBDTG_MBD_CHECKPOINT_H_

#include <memory>
#include <string>

#include "mbdtg/mbd/model.h"

namespace mbdtg::mbd {

inline constexpr uint32_t kCheckpointVersion = 1;

// Binary container: magic, version, a JSON header (model config and both
// vocabularies), named little-endian float64 tensors, and a SHA-256 trailer
// over everything before it.
std::string SerializeCheckpoint(const Model &model);
std::unique_ptr<Model> ParseCheckpoint(const std::string &bytes);

void SaveCheckpoint(const Model &model, const std::string &path);
std::unique_ptr<Model> LoadCheckpoint(const std::string &path);

}  // namespace mbdtg::mbd

#endif  // MBDTG_MBD_CHECKPOINT_H_
