// Copyright 2026 The Instructkit Authors.
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

#ifndef INSTRUCTKIT_CONFIG_H_
#define INSTRUCTKIT_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace instructkit {

// Plain-text "key = value" configuration. '#' starts a comment line, blank
// lines are ignored, later keys override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  static KeyValueConfig Parse(std::string_view text, std::string_view origin);
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> Get(const std::string& key) const;
  std::string GetString(const std::string& key, std::string fallback) const;
  long long GetInt(const std::string& key, long long fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  // Comma-separated, entries trimmed, empties dropped.
  std::vector<std::string> GetList(const std::string& key,
                                   std::vector<std::string> fallback) const;
  void Set(const std::string& key, std::string value) { values_[key] = value; }

  // Throws ConfigError naming the first key not in `known`.
  void RejectUnknown(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  // Directory of the file the config came from; relative paths resolve here.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
  std::string origin_;
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_CONFIG_H_
