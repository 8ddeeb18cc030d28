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

#ifndef MBDTG_CHECKSUM_H_
#define MBDTG_CHECKSUM_H_

#include <string>
#include <string_view>

namespace mbdtg {

// Lowercase hex SHA-256 of a byte string.
std::string Sha256Hex(std::string_view bytes);

// SHA-256 of a file's contents. Throws Error(kNotFound) if unreadable.
std::string FileSha256Hex(const std::string &path);

// Reads a whole file. Throws Error(kNotFound) when it cannot be opened.
std::string ReadFile(const std::string &path);

// Writes a whole file atomically enough for our purposes (truncate + write).
void WriteFile(const std::string &path, std::string_view bytes);

}  // namespace mbdtg

#endif  // MBDTG_CHECKSUM_H_
