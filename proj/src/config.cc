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

#include "instructkit/config.h"

#include <cstdlib>

#include "instructkit/error.h"
#include "instructkit/util.h"

namespace instructkit {

KeyValueConfig KeyValueConfig::Parse(std::string_view text,
                                     std::string_view origin) {
  KeyValueConfig cfg;
  cfg.origin_ = std::string(origin);
  size_t line_number = 0;
  for (std::string_view raw : SplitLines(text)) {
    ++line_number;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_number) +
                        ": expected 'key = value'");
    }
    std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_number) +
                        ": empty key");
    }
    cfg.values_[key] = std::string(Trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  KeyValueConfig cfg = Parse(ReadFile(path), path.string());
  cfg.base_dir_ = path.parent_path();
  return cfg;
}

std::optional<std::string> KeyValueConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      std::string fallback) const {
  auto v = Get(key);
  return v ? *v : fallback;
}

long long KeyValueConfig::GetInt(const std::string& key,
                                 long long fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  char* end = nullptr;
  long long n = std::strtoll(v->c_str(), &end, 10);
  if (v->empty() || *end != '\0') {
    throw ConfigError(origin_ + ": '" + key + "' must be an integer, got '" +
                      *v + "'");
  }
  return n;
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  char* end = nullptr;
  double d = std::strtod(v->c_str(), &end);
  if (v->empty() || *end != '\0') {
    throw ConfigError(origin_ + ": '" + key + "' must be a number, got '" + *v +
                      "'");
  }
  return d;
}

std::vector<std::string> KeyValueConfig::GetList(
    const std::string& key, std::vector<std::string> fallback) const {
  auto v = Get(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (const auto& part : Split(*v, ',')) {
    std::string_view t = Trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

void KeyValueConfig::RejectUnknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) {
      throw ConfigError(origin_ + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace instructkit
