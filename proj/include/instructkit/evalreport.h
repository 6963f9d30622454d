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

#ifndef INSTRUCTKIT_EVALREPORT_H_
#define INSTRUCTKIT_EVALREPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "instructkit/metrics.h"
#include "instructkit/util.h"

namespace instructkit {

enum class Dimension {
  kValidity,
  kInstructionType,
  kInputFaithfulness,
  kOutputCorrectness,
  kExplanationQuality,
  kCategory,
  kSkill,
};

std::string_view DimensionName(Dimension d);
std::optional<Dimension> ParseDimension(std::string_view s);
// The five rubric dimensions, in reporting order.
std::span<const Dimension> RubricDimensions();

struct DimensionSchema {
  Dimension id;
  // Display order. For ordinal dimensions this is best first.
  std::vector<std::string> labels;
  bool ordinal = false;

  static const DimensionSchema& For(Dimension d);
  bool Contains(std::string_view label) const;
  // 0 is the lowest rank. Throws ValidationError for unknown labels or
  // nominal dimensions.
  int Rank(std::string_view label) const;
  // Lowest first, as the agreement code expects.
  std::vector<std::string> AscendingLabels() const;
  MeasurementLevel level() const {
    return ordinal ? MeasurementLevel::kOrdinal : MeasurementLevel::kNominal;
  }
};

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  Dimension dimension = Dimension::kValidity;
  std::string label;
  Timestamp timestamp{};
  // Present when the item is a model output rather than a generated tuple.
  std::string model_id;

  bool operator==(const AnnotationRecord&) const = default;
};

std::string AnnotationToJsonLine(const AnnotationRecord& r);
// Throws ValidationError prefixed with "<origin>:<line>: ".
std::vector<AnnotationRecord> ParseAnnotationsJsonl(std::string_view text,
                                                    std::string_view origin);
std::vector<AnnotationRecord> LoadAnnotations(const std::filesystem::path& path);

struct ModelOutputRecord {
  std::string instruction_id;
  std::string model_id;
  std::string output;
  std::string explanation;
  std::string blinded_key;

  bool operator==(const ModelOutputRecord&) const = default;
};

std::string ModelOutputToJsonLine(const ModelOutputRecord& r);
// Rejects duplicate (instruction_id, model_id) pairs.
std::vector<ModelOutputRecord> ParseModelOutputsJsonl(std::string_view text,
                                                      std::string_view origin);
std::vector<ModelOutputRecord> LoadModelOutputs(
    const std::filesystem::path& path);

enum class ResolutionMode { kAdjudicated, kMajority };
std::optional<ResolutionMode> ParseResolutionMode(std::string_view s);

// (item_id, model_id) -> resolved label for one dimension. Adjudicated mode
// requires every record of a key to carry the same label. Majority mode
// breaks ties toward the lower rank, or the smaller label for nominal data.
using ItemKey = std::pair<std::string, std::string>;
std::map<ItemKey, std::string> ResolveLabels(
    std::span<const AnnotationRecord> records, Dimension dimension,
    ResolutionMode mode);

// Percentages are held as integer hundredths. Each column is apportioned by
// largest remainder so it sums to exactly 100.00.
struct ProportionTable {
  Dimension dimension = Dimension::kValidity;
  std::vector<std::string> labels;  // rows
  std::vector<std::string> models;  // columns
  std::vector<std::vector<int64_t>> counts;      // [label][model]
  std::vector<std::vector<int64_t>> hundredths;  // [label][model]
  std::vector<int64_t> totals;                   // per model

  double Percent(size_t label, size_t model) const {
    return static_cast<double>(hundredths[label][model]) / 100.0;
  }
};

// `models` fixes the column order; empty means sorted model ids found in
// the records. Every item seen for the dimension must be labeled for every
// model, otherwise a ValidationError lists the gaps.
ProportionTable ComputeProportions(std::span<const AnnotationRecord> records,
                                   Dimension dimension,
                                   std::vector<std::string> models = {},
                                   ResolutionMode mode =
                                       ResolutionMode::kAdjudicated);

// Integer hundredths to "d.dd".
std::string FormatHundredths(int64_t h);
// Integer hundredths of count/total, rounded half up.
int64_t HundredthsHalfUp(int64_t count, int64_t total);
// Largest-remainder apportionment of 10000 hundredths; ties go to the
// earlier entry.
std::vector<int64_t> ApportionHundredths(std::span<const int64_t> counts);

struct WinTie {
  Dimension dimension = Dimension::kValidity;
  std::string model_a;
  std::string model_b;
  int64_t shared_items = 0;
  int64_t win_a = 0;
  int64_t win_b = 0;
  int64_t tie = 0;
  int64_t win_a_hundredths = 0;
  int64_t win_b_hundredths = 0;
  int64_t tie_hundredths = 0;
};

// Compares ordinal ranks per shared item. Throws when the dimension is
// nominal or no item carries both models.
WinTie ComputeWinTie(std::span<const AnnotationRecord> records,
                     Dimension dimension, const std::string& model_a,
                     const std::string& model_b,
                     ResolutionMode mode = ResolutionMode::kAdjudicated);

struct WinTieMatrix {
  Dimension dimension = Dimension::kValidity;
  std::vector<std::string> models;
  // cells[i][j] compares models[i] (as A) with models[j]; diagonal unset.
  std::vector<std::vector<std::optional<WinTie>>> cells;
};

WinTieMatrix ComputeWinTieMatrix(std::span<const AnnotationRecord> records,
                                 Dimension dimension,
                                 std::vector<std::string> models = {},
                                 ResolutionMode mode =
                                     ResolutionMode::kAdjudicated);

// Average pairwise alpha for each requested dimension that has records.
// Items are keyed by (item_id, model_id).
std::vector<AgreementReport> EvaluateAgreement(
    std::span<const AnnotationRecord> records,
    std::span<const Dimension> dimensions);

struct Distribution {
  Dimension dimension = Dimension::kCategory;
  std::vector<std::string> labels;  // full taxonomy, display order
  std::vector<int64_t> counts;
  std::vector<int64_t> hundredths;
  int64_t total = 0;
};

struct CategoryReport {
  std::optional<Distribution> category;
  std::optional<Distribution> skill;
};

// Throws ValidationError when there is neither a category nor a skill label.
CategoryReport CategoryDistribution(std::span<const AnnotationRecord> records,
                                    ResolutionMode mode =
                                        ResolutionMode::kMajority);

enum class TableFormat { kText, kCsv };
std::optional<TableFormat> ParseTableFormat(std::string_view s);

std::string RenderProportions(std::span<const ProportionTable> tables,
                              TableFormat format);
std::string RenderWinTie(std::span<const WinTieMatrix> matrices,
                         TableFormat format);
std::string RenderAgreement(std::span<const AgreementReport> reports,
                            TableFormat format);
std::string RenderCategories(const CategoryReport& report, TableFormat format);

}  // namespace instructkit

#endif  // INSTRUCTKIT_EVALREPORT_H_
