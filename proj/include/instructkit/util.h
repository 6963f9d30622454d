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

#ifndef INSTRUCTKIT_UTIL_H_
#define INSTRUCTKIT_UTIL_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace instructkit {

// Strips leading and trailing ASCII whitespace.
std::string_view Trim(std::string_view s);
std::string ToLowerAscii(std::string_view s);
bool StartsWith(std::string_view s, std::string_view prefix);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);
std::vector<std::string_view> SplitLines(std::string_view text);
std::vector<std::string> Split(std::string_view s, char sep);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// Seconds-resolution UTC time.
using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DDTHH:MM:SSZ".
std::string FormatRfc3339(Timestamp t);
// Accepts fractional seconds and numeric offsets; fractions are truncated.
// Throws ValidationError on malformed input.
Timestamp ParseRfc3339(std::string_view s);
Timestamp NowUtc();

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::filesystem::path& path);
// Writes through a sibling temp file and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);
// Appends `data` with a single write(2) on an O_APPEND descriptor, then
// fsyncs.
void AppendFileDurable(const std::filesystem::path& path, std::string_view data);

// Formats a value to exactly two decimals ("63.50").
std::string FormatFixed2(double value);

}  // namespace instructkit

#endif  // INSTRUCTKIT_UTIL_H_
