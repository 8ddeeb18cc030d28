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

#ifndef MBDTG_CONFIG_FILE_H_
#define MBDTG_CONFIG_FILE_H_

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mbdtg {

// Flat `key = value` configuration. Lines starting with '#' are comments.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile Parse(const std::string &text);
  static ConfigFile Load(const std::string &path);

  bool Has(const std::string &key) const { return values_.count(key) > 0; }
  void Set(const std::string &key, const std::string &value) {
    values_[key] = value;
  }

  std::string GetString(const std::string &key, const std::string &fallback) const;
  double GetDouble(const std::string &key, double fallback) const;
  long GetInt(const std::string &key, long fallback) const;
  // Comma-separated list; whitespace around items is stripped.
  std::vector<std::string> GetList(const std::string &key,
                                   const std::vector<std::string> &fallback) const;

  // Throws if any key is outside `known`.
  void CheckKnown(const std::set<std::string> &known) const;

  const std::map<std::string, std::string> &values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mbdtg

#endif  // MBDTG_CONFIG_FILE_H_
