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

#ifndef MBDTG_ERROR_H_
#define MBDTG_ERROR_H_

#include <stdexcept>
#include <string>

namespace mbdtg {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kNotFound = 2,
  kIo = 3,
  kMalformed = 4,
  kChecksum = 5,
  kVersion = 6,
  kNumeric = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mbdtg

#endif  // MBDTG_ERROR_H_
