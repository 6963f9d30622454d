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

#ifndef INSTRUCTKIT_METRICS_H_
#define INSTRUCTKIT_METRICS_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace instructkit {

// ---------------------------------------------------------------------------
// ROUGE-L

struct TokenSequence {
  std::vector<std::string> tokens;

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

// Lowercases ASCII letters, splits on Unicode whitespace, strips leading and
// trailing punctuation from every token and drops tokens left empty.
// Non-ASCII letters are kept byte-for-byte.
TokenSequence Tokenize(std::string_view text);

// Length of the longest common subsequence. O(|a||b|) time,
// O(min(|a|,|b|)) memory.
size_t LcsLength(const TokenSequence& a, const TokenSequence& b);

// ROUGE-L F1 with precision L/|b| and recall L/|a|. 0 when the LCS is empty
// (including both operands empty).
double RougeLF1(const TokenSequence& a, const TokenSequence& b);

// ---------------------------------------------------------------------------
// Krippendorff's alpha

enum class MeasurementLevel { kNominal, kOrdinal };

struct Rating {
  std::string item_id;
  std::string annotator_id;
  std::string label;
};

struct AgreementInput {
  std::string dimension;
  std::vector<Rating> records;
  MeasurementLevel level = MeasurementLevel::kNominal;
  // Label order, lowest first. Required for ordinal data and must cover
  // every label used.
  std::vector<std::string> ordering;
};

struct AlphaResult {
  double alpha = 1.0;
  // Expected disagreement was zero (a single label used throughout); alpha
  // is reported as 1.0.
  bool degenerate = false;
  size_t pairable_values = 0;
  size_t units = 0;
};

// Coincidence-matrix alpha. Units with fewer than two labels are ignored.
// Throws ValidationError on duplicate (item, annotator) pairs, fewer than two
// annotators, unordered ordinal labels, or no unit with two labels
// ("insufficient overlap").
AlphaResult KrippendorffAlpha(const AgreementInput& input);

struct PairAlpha {
  std::string annotator_a;
  std::string annotator_b;
  double alpha = 0;
  size_t n_items = 0;
  bool degenerate = false;
};

struct AgreementReport {
  std::string dimension;
  std::vector<PairAlpha> pairs;  // sorted by (annotator_a, annotator_b)
  double average_alpha = 0;      // unweighted mean over `pairs`
  // Annotator pairs with no shared item.
  std::vector<std::pair<std::string, std::string>> excluded_pairs;
};

// Alpha for every annotator pair on the items both labeled, then the
// unweighted mean. Throws ValidationError if no pair overlaps.
AgreementReport AveragePairwiseAlpha(const AgreementInput& input);

}  // namespace instructkit

#endif  // INSTRUCTKIT_METRICS_H_
