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

#include "oracles.h"

#include <algorithm>
#include <map>

namespace instructkit::testing {

size_t OracleLcs(const std::vector<std::string>& a,
                 const std::vector<std::string>& b) {
  std::vector<std::vector<size_t>> t(a.size() + 1,
                                     std::vector<size_t>(b.size() + 1, 0));
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1
                                     : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

double OracleRougeF1(const std::vector<std::string>& a,
                     const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double l = static_cast<double>(OracleLcs(a, b));
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(b.size());
  const double r = l / static_cast<double>(a.size());
  return 2 * p * r / (p + r);
}

OracleAlphaResult OracleAlpha(const std::vector<Rating>& records,
                              MeasurementLevel level,
                              const std::vector<std::string>& ordering) {
  std::map<std::string, std::vector<std::string>> units;
  for (const auto& r : records) units[r.item_id].push_back(r.label);

  std::vector<std::string> pooled;
  for (const auto& [id, values] : units) {
    if (values.size() >= 2) pooled.insert(pooled.end(), values.begin(), values.end());
  }
  std::map<std::string, double> freq;
  for (const auto& v : pooled) freq[v] += 1;

  auto delta = [&](const std::string& c, const std::string& k) -> double {
    if (c == k) return 0.0;
    if (level == MeasurementLevel::kNominal) return 1.0;
    auto ic = std::find(ordering.begin(), ordering.end(), c) - ordering.begin();
    auto ik = std::find(ordering.begin(), ordering.end(), k) - ordering.begin();
    if (ic > ik) std::swap(ic, ik);
    double sum = 0;
    for (auto g = ic; g <= ik; ++g) sum += freq[ordering[g]];
    sum -= (freq[c] + freq[k]) / 2.0;
    return sum * sum;
  };

  const double n = static_cast<double>(pooled.size());
  double observed = 0;
  for (const auto& [id, values] : units) {
    if (values.size() < 2) continue;
    const double m = static_cast<double>(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      for (size_t j = 0; j < values.size(); ++j) {
        if (i != j) observed += delta(values[i], values[j]) / (m - 1);
      }
    }
  }
  double expected = 0;
  for (size_t i = 0; i < pooled.size(); ++i) {
    for (size_t j = 0; j < pooled.size(); ++j) {
      if (i != j) expected += delta(pooled[i], pooled[j]);
    }
  }
  if (expected == 0) return {1.0, true};
  return {1.0 - (n - 1) * observed / expected, false};
}

}  // namespace instructkit::testing
