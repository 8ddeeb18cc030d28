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

#include "mbdtg/config_file.h"

#include <charconv>
#include <sstream>

#include "mbdtg/checksum.h"
#include "mbdtg/error.h"

namespace mbdtg {
namespace {

std::string Trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigFile ConfigFile::Parse(const std::string &text) {
  ConfigFile config;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kMalformed,
                  "config line " + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kMalformed,
                  "config line " + std::to_string(line_number) + ": empty key");
    }
    config.values_[key] = Trim(line.substr(eq + 1));
  }
  return config;
}

ConfigFile ConfigFile::Load(const std::string &path) { return Parse(ReadFile(path)); }

std::string ConfigFile::GetString(const std::string &key,
                                  const std::string &fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::GetDouble(const std::string &key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t used = 0;
    double value = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return value;
  } catch (const std::exception &) {
    throw Error(ErrorCode::kInvalidArgument,
                "config key " + key + ": not a number: " + it->second);
  }
}

long ConfigFile::GetInt(const std::string &key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long value = 0;
  const auto &s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "config key " + key + ": not an integer: " + s);
  }
  return value;
}

std::vector<std::string> ConfigFile::GetList(
    const std::string &key, const std::vector<std::string> &fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> items;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

void ConfigFile::CheckKnown(const std::set<std::string> &known) const {
  for (const auto &[key, value] : values_) {
    if (known.count(key) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "unknown config key: " + key);
    }
  }
}

}  // namespace mbdtg
