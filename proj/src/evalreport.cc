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

#include "instructkit/evalreport.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <set>

#include "instructkit/error.h"
#include "json.hpp"

namespace instructkit {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<Dimension, 5> kRubric = {
    Dimension::kValidity, Dimension::kInstructionType,
    Dimension::kInputFaithfulness, Dimension::kOutputCorrectness,
    Dimension::kExplanationQuality};

struct NamedDimension {
  Dimension d;
  std::string_view name;
};
constexpr std::array<NamedDimension, 7> kNames = {{
    {Dimension::kValidity, "validity"},
    {Dimension::kInstructionType, "instruction_type"},
    {Dimension::kInputFaithfulness, "input_faithfulness"},
    {Dimension::kOutputCorrectness, "output_correctness"},
    {Dimension::kExplanationQuality, "explanation_quality"},
    {Dimension::kCategory, "category"},
    {Dimension::kSkill, "skill"},
}};

std::string StringField(const ordered_json& j, const char* key, bool required,
                        const std::string& where) {
  if (!j.contains(key)) {
    if (required) throw ValidationError(where + "missing field '" + key + "'");
    return "";
  }
  if (!j[key].is_string()) {
    throw ValidationError(where + "field '" + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

void RejectUnknownFields(const ordered_json& j,
                         std::initializer_list<std::string_view> known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ValidationError(where + "unknown field '" + it.key() + "'");
    }
  }
}

template <typename F>
void ForEachJsonLine(std::string_view text, std::string_view origin, F fn) {
  size_t line_number = 0;
  for (std::string_view raw : SplitLines(text)) {
    ++line_number;
    if (Trim(raw).empty()) continue;
    const std::string where =
        std::string(origin) + ":" + std::to_string(line_number) + ": ";
    ordered_json j = ordered_json::parse(raw, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError(where + "not a JSON object");
    }
    fn(j, where);
  }
}

std::string Dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<std::string> ModelsOf(std::span<const AnnotationRecord> records,
                                  Dimension dimension) {
  std::set<std::string> models;
  for (const auto& r : records) {
    if (r.dimension == dimension) models.insert(r.model_id);
  }
  return {models.begin(), models.end()};
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Left-aligned first column, right-aligned others.
std::string AlignRows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width;
  for (const auto& row : rows) {
    if (row.size() > width.size()) width.resize(row.size(), 0);
    for (size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        line += row[i] + std::string(width[0] - row[i].size(), ' ');
      } else {
        line += "  " + std::string(width[i] - row[i].size(), ' ') + row[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string CsvRows(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += CsvField(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string Render(const std::vector<std::vector<std::string>>& rows,
                   TableFormat format) {
  return format == TableFormat::kCsv ? CsvRows(rows) : AlignRows(rows);
}

std::string ModelLabel(const std::string& model) {
  return model.empty() ? "(none)" : model;
}

}  // namespace

std::string_view DimensionName(Dimension d) {
  for (const auto& n : kNames) {
    if (n.d == d) return n.name;
  }
  return "unknown";
}

std::optional<Dimension> ParseDimension(std::string_view s) {
  for (const auto& n : kNames) {
    if (n.name == s) return n.d;
  }
  return std::nullopt;
}

std::span<const Dimension> RubricDimensions() { return kRubric; }

const DimensionSchema& DimensionSchema::For(Dimension d) {
  static const std::map<Dimension, DimensionSchema> schemas = {
      {Dimension::kValidity,
       {Dimension::kValidity, {"valid_and_ready", "valid", "invalid"}, true}},
      {Dimension::kInstructionType,
       {Dimension::kInstructionType, {"factual", "not_factual"}, true}},
      {Dimension::kInputFaithfulness,
       {Dimension::kInputFaithfulness, {"matches", "not_matches"}, true}},
      {Dimension::kOutputCorrectness,
       {Dimension::kOutputCorrectness, {"right", "wrong"}, true}},
      {Dimension::kExplanationQuality,
       {Dimension::kExplanationQuality, {"yes", "weak_yes", "weak_no", "no"},
        true}},
      {Dimension::kCategory,
       {Dimension::kCategory,
        {"grammar", "vocabulary", "semantic", "pragmatic", "figurative",
         "prose_question", "prose_reply", "prose_other", "build_a_sentence"},
        false}},
      {Dimension::kSkill,
       {Dimension::kSkill,
        {"reading", "writing", "reading_writing", "speaking", "listening"},
        false}},
  };
  return schemas.at(d);
}

bool DimensionSchema::Contains(std::string_view label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

int DimensionSchema::Rank(std::string_view label) const {
  if (!ordinal) {
    throw ValidationError(std::string(DimensionName(id)) + " is not ordinal");
  }
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw ValidationError("unknown " + std::string(DimensionName(id)) +
                          " label '" + std::string(label) + "'");
  }
  return static_cast<int>(labels.end() - it) - 1;
}

std::vector<std::string> DimensionSchema::AscendingLabels() const {
  if (!ordinal) return labels;
  return {labels.rbegin(), labels.rend()};
}

std::string AnnotationToJsonLine(const AnnotationRecord& r) {
  ordered_json j;
  j["item_id"] = r.item_id;
  j["annotator_id"] = r.annotator_id;
  j["dimension"] = DimensionName(r.dimension);
  j["label"] = r.label;
  j["timestamp"] = FormatRfc3339(r.timestamp);
  if (!r.model_id.empty()) j["model_id"] = r.model_id;
  return Dump(j);
}

std::vector<AnnotationRecord> ParseAnnotationsJsonl(std::string_view text,
                                                    std::string_view origin) {
  std::vector<AnnotationRecord> out;
  ForEachJsonLine(text, origin, [&](const ordered_json& j,
                                    const std::string& where) {
    RejectUnknownFields(j, {"item_id", "annotator_id", "dimension", "label",
                            "timestamp", "model_id"},
                        where);
    AnnotationRecord r;
    r.item_id = StringField(j, "item_id", true, where);
    r.annotator_id = StringField(j, "annotator_id", true, where);
    const std::string dim = StringField(j, "dimension", true, where);
    auto d = ParseDimension(dim);
    if (!d) throw ValidationError(where + "unknown dimension '" + dim + "'");
    r.dimension = *d;
    r.label = StringField(j, "label", true, where);
    if (!DimensionSchema::For(*d).Contains(r.label)) {
      throw ValidationError(where + "label '" + r.label +
                            "' is not valid for " + dim);
    }
    try {
      r.timestamp = ParseRfc3339(StringField(j, "timestamp", true, where));
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      throw ValidationError(StartsWith(msg, where) ? msg : where + msg);
    }
    r.model_id = StringField(j, "model_id", false, where);
    if (r.item_id.empty() || r.annotator_id.empty()) {
      throw ValidationError(where + "item_id and annotator_id must be nonempty");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<AnnotationRecord> LoadAnnotations(const std::filesystem::path& path) {
  return ParseAnnotationsJsonl(ReadFile(path), path.string());
}

std::string ModelOutputToJsonLine(const ModelOutputRecord& r) {
  ordered_json j;
  j["instruction_id"] = r.instruction_id;
  j["model_id"] = r.model_id;
  j["output"] = r.output;
  j["explanation"] = r.explanation;
  if (!r.blinded_key.empty()) j["blinded_key"] = r.blinded_key;
  return Dump(j);
}

std::vector<ModelOutputRecord> ParseModelOutputsJsonl(std::string_view text,
                                                      std::string_view origin) {
  std::vector<ModelOutputRecord> out;
  std::set<ItemKey> seen;
  ForEachJsonLine(text, origin, [&](const ordered_json& j,
                                    const std::string& where) {
    RejectUnknownFields(
        j, {"instruction_id", "model_id", "output", "explanation", "blinded_key"},
        where);
    ModelOutputRecord r;
    r.instruction_id = StringField(j, "instruction_id", true, where);
    r.model_id = StringField(j, "model_id", true, where);
    r.output = StringField(j, "output", true, where);
    r.explanation = StringField(j, "explanation", false, where);
    r.blinded_key = StringField(j, "blinded_key", false, where);
    if (r.instruction_id.empty() || r.model_id.empty()) {
      throw ValidationError(where +
                            "instruction_id and model_id must be nonempty");
    }
    if (!seen.insert({r.instruction_id, r.model_id}).second) {
      throw ValidationError(where + "duplicate output for (" +
                            r.instruction_id + ", " + r.model_id + ")");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ModelOutputRecord> LoadModelOutputs(
    const std::filesystem::path& path) {
  return ParseModelOutputsJsonl(ReadFile(path), path.string());
}

std::optional<ResolutionMode> ParseResolutionMode(std::string_view s) {
  if (s == "adjudicated") return ResolutionMode::kAdjudicated;
  if (s == "majority") return ResolutionMode::kMajority;
  return std::nullopt;
}

std::map<ItemKey, std::string> ResolveLabels(
    std::span<const AnnotationRecord> records, Dimension dimension,
    ResolutionMode mode) {
  const DimensionSchema& schema = DimensionSchema::For(dimension);
  std::map<ItemKey, std::map<std::string, int>> votes;
  for (const auto& r : records) {
    if (r.dimension != dimension) continue;
    if (!schema.Contains(r.label)) {
      throw ValidationError("label '" + r.label + "' is not valid for " +
                            std::string(DimensionName(dimension)));
    }
    ++votes[{r.item_id, r.model_id}][r.label];
  }
  std::map<ItemKey, std::string> out;
  for (const auto& [key, counts] : votes) {
    if (mode == ResolutionMode::kAdjudicated) {
      if (counts.size() > 1) {
        throw ValidationError(
            "conflicting " + std::string(DimensionName(dimension)) +
            " labels for item '" + key.first + "'" +
            (key.second.empty() ? "" : " model '" + key.second + "'") +
            "; adjudicate or use majority resolution");
      }
      out[key] = counts.begin()->first;
      continue;
    }
    const std::string* best = nullptr;
    int best_votes = -1;
    for (const auto& [label, n] : counts) {
      bool better = n > best_votes;
      if (n == best_votes) {
        better = schema.ordinal ? schema.Rank(label) < schema.Rank(*best)
                                : label < *best;
      }
      if (better) {
        best = &label;
        best_votes = n;
      }
    }
    out[key] = *best;
  }
  return out;
}

std::string FormatHundredths(int64_t h) {
  const bool negative = h < 0;
  if (negative) h = -h;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", negative ? "-" : "",
                static_cast<long long>(h / 100), static_cast<long long>(h % 100));
  return buf;
}

int64_t HundredthsHalfUp(int64_t count, int64_t total) {
  if (total <= 0) throw ValidationError("percentage over an empty total");
  return (count * 20000 + total) / (2 * total);
}

std::vector<int64_t> ApportionHundredths(std::span<const int64_t> counts) {
  const int64_t total = std::accumulate(counts.begin(), counts.end(), int64_t{0});
  if (total <= 0) throw ValidationError("percentage over an empty total");
  std::vector<int64_t> out(counts.size());
  std::vector<int64_t> remainder(counts.size());
  int64_t assigned = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    out[i] = counts[i] * 10000 / total;
    remainder[i] = counts[i] * 10000 % total;
    assigned += out[i];
  }
  std::vector<size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainder[a] > remainder[b];
  });
  for (size_t k = 0; assigned < 10000; ++k, ++assigned) ++out[order[k]];
  return out;
}

ProportionTable ComputeProportions(std::span<const AnnotationRecord> records,
                                   Dimension dimension,
                                   std::vector<std::string> models,
                                   ResolutionMode mode) {
  const DimensionSchema& schema = DimensionSchema::For(dimension);
  auto resolved = ResolveLabels(records, dimension, mode);
  if (models.empty()) models = ModelsOf(records, dimension);
  if (models.empty()) {
    throw ValidationError("no " + std::string(DimensionName(dimension)) +
                          " records");
  }
  std::set<std::string> items;
  for (const auto& [key, label] : resolved) items.insert(key.first);
  std::vector<std::string> gaps;
  for (const auto& item : items) {
    for (const auto& m : models) {
      if (!resolved.count({item, m})) gaps.push_back("(" + item + ", " + m + ")");
    }
  }
  if (!gaps.empty()) {
    throw ValidationError("missing " + std::string(DimensionName(dimension)) +
                          " labels for " + Join(gaps, ", "));
  }

  ProportionTable t;
  t.dimension = dimension;
  t.labels = schema.labels;
  t.models = models;
  t.counts.assign(t.labels.size(), std::vector<int64_t>(models.size(), 0));
  t.hundredths = t.counts;
  t.totals.assign(models.size(), 0);
  for (size_t m = 0; m < models.size(); ++m) {
    for (const auto& item : items) {
      const std::string& label = resolved.at({item, models[m]});
      size_t row = std::find(t.labels.begin(), t.labels.end(), label) -
                   t.labels.begin();
      ++t.counts[row][m];
      ++t.totals[m];
    }
    std::vector<int64_t> column(t.labels.size());
    for (size_t l = 0; l < t.labels.size(); ++l) column[l] = t.counts[l][m];
    std::vector<int64_t> h = ApportionHundredths(column);
    for (size_t l = 0; l < t.labels.size(); ++l) t.hundredths[l][m] = h[l];
  }
  return t;
}

namespace {

WinTie WinTieFromResolved(const std::map<ItemKey, std::string>& resolved,
                          Dimension dimension, const std::string& model_a,
                          const std::string& model_b) {
  const DimensionSchema& schema = DimensionSchema::For(dimension);
  WinTie w;
  w.dimension = dimension;
  w.model_a = model_a;
  w.model_b = model_b;
  for (const auto& [key, label_a] : resolved) {
    if (key.second != model_a) continue;
    auto it = resolved.find({key.first, model_b});
    if (it == resolved.end()) continue;
    ++w.shared_items;
    const int ra = schema.Rank(label_a);
    const int rb = schema.Rank(it->second);
    if (ra > rb) {
      ++w.win_a;
    } else if (ra < rb) {
      ++w.win_b;
    } else {
      ++w.tie;
    }
  }
  if (w.shared_items == 0) {
    throw ValidationError("no shared " + std::string(DimensionName(dimension)) +
                          " items for '" + model_a + "' and '" + model_b + "'");
  }
  w.win_a_hundredths = HundredthsHalfUp(w.win_a, w.shared_items);
  w.win_b_hundredths = HundredthsHalfUp(w.win_b, w.shared_items);
  w.tie_hundredths = HundredthsHalfUp(w.tie, w.shared_items);
  return w;
}

}  // namespace

WinTie ComputeWinTie(std::span<const AnnotationRecord> records,
                     Dimension dimension, const std::string& model_a,
                     const std::string& model_b, ResolutionMode mode) {
  if (!DimensionSchema::For(dimension).ordinal) {
    throw ValidationError(std::string(DimensionName(dimension)) +
                          " has no ordering to compare");
  }
  return WinTieFromResolved(ResolveLabels(records, dimension, mode), dimension,
                            model_a, model_b);
}

WinTieMatrix ComputeWinTieMatrix(std::span<const AnnotationRecord> records,
                                 Dimension dimension,
                                 std::vector<std::string> models,
                                 ResolutionMode mode) {
  if (!DimensionSchema::For(dimension).ordinal) {
    throw ValidationError(std::string(DimensionName(dimension)) +
                          " has no ordering to compare");
  }
  auto resolved = ResolveLabels(records, dimension, mode);
  if (models.empty()) models = ModelsOf(records, dimension);
  WinTieMatrix m;
  m.dimension = dimension;
  m.models = models;
  m.cells.assign(models.size(),
                 std::vector<std::optional<WinTie>>(models.size()));
  for (size_t i = 0; i < models.size(); ++i) {
    for (size_t j = 0; j < models.size(); ++j) {
      if (i == j) continue;
      m.cells[i][j] = WinTieFromResolved(resolved, dimension, models[i], models[j]);
    }
  }
  return m;
}

std::vector<AgreementReport> EvaluateAgreement(
    std::span<const AnnotationRecord> records,
    std::span<const Dimension> dimensions) {
  std::vector<AgreementReport> out;
  for (Dimension d : dimensions) {
    const DimensionSchema& schema = DimensionSchema::For(d);
    AgreementInput input;
    input.dimension = std::string(DimensionName(d));
    input.level = schema.level();
    input.ordering = schema.AscendingLabels();
    for (const auto& r : records) {
      if (r.dimension != d) continue;
      std::string item = r.item_id;
      if (!r.model_id.empty()) item += "\x1f" + r.model_id;
      input.records.push_back({item, r.annotator_id, r.label});
    }
    if (input.records.empty()) continue;
    out.push_back(AveragePairwiseAlpha(input));
  }
  return out;
}

CategoryReport CategoryDistribution(std::span<const AnnotationRecord> records,
                                    ResolutionMode mode) {
  CategoryReport report;
  for (Dimension d : {Dimension::kCategory, Dimension::kSkill}) {
    auto resolved = ResolveLabels(records, d, mode);
    if (resolved.empty()) continue;
    const DimensionSchema& schema = DimensionSchema::For(d);
    Distribution dist;
    dist.dimension = d;
    dist.labels = schema.labels;
    dist.counts.assign(dist.labels.size(), 0);
    for (const auto& [key, label] : resolved) {
      ++dist.counts[std::find(dist.labels.begin(), dist.labels.end(), label) -
                    dist.labels.begin()];
      ++dist.total;
    }
    dist.hundredths = ApportionHundredths(dist.counts);
    (d == Dimension::kCategory ? report.category : report.skill) =
        std::move(dist);
  }
  if (!report.category && !report.skill) {
    throw ValidationError("no category or skill labels");
  }
  return report;
}

std::optional<TableFormat> ParseTableFormat(std::string_view s) {
  if (s == "text") return TableFormat::kText;
  if (s == "csv") return TableFormat::kCsv;
  return std::nullopt;
}

std::string RenderProportions(std::span<const ProportionTable> tables,
                              TableFormat format) {
  std::vector<std::vector<std::string>> rows;
  if (tables.empty()) return "";
  if (format == TableFormat::kCsv) {
    std::vector<std::string> header = {"dimension", "label"};
    for (const auto& m : tables.front().models) header.push_back(ModelLabel(m));
    rows.push_back(header);
    for (const auto& t : tables) {
      for (size_t l = 0; l < t.labels.size(); ++l) {
        std::vector<std::string> row = {std::string(DimensionName(t.dimension)),
                                        t.labels[l]};
        for (size_t m = 0; m < t.models.size(); ++m) {
          row.push_back(FormatHundredths(t.hundredths[l][m]));
        }
        rows.push_back(row);
      }
    }
    return CsvRows(rows);
  }
  std::vector<std::string> header = {""};
  for (const auto& m : tables.front().models) header.push_back(ModelLabel(m));
  rows.push_back(header);
  for (const auto& t : tables) {
    rows.push_back({std::string(DimensionName(t.dimension))});
    for (size_t l = 0; l < t.labels.size(); ++l) {
      std::vector<std::string> row = {"  " + t.labels[l]};
      for (size_t m = 0; m < t.models.size(); ++m) {
        row.push_back(FormatHundredths(t.hundredths[l][m]));
      }
      rows.push_back(row);
    }
  }
  return AlignRows(rows);
}

std::string RenderWinTie(std::span<const WinTieMatrix> matrices,
                         TableFormat format) {
  if (format == TableFormat::kCsv) {
    std::vector<std::vector<std::string>> rows = {
        {"dimension", "model_a", "model_b", "win_a", "win_b", "tie",
         "shared_items"}};
    for (const auto& m : matrices) {
      for (const auto& row : m.cells) {
        for (const auto& cell : row) {
          if (!cell) continue;
          rows.push_back({std::string(DimensionName(m.dimension)),
                          ModelLabel(cell->model_a), ModelLabel(cell->model_b),
                          FormatHundredths(cell->win_a_hundredths),
                          FormatHundredths(cell->win_b_hundredths),
                          FormatHundredths(cell->tie_hundredths),
                          std::to_string(cell->shared_items)});
        }
      }
    }
    return CsvRows(rows);
  }
  std::string out;
  for (const auto& m : matrices) {
    for (bool tie : {false, true}) {
      out += std::string(DimensionName(m.dimension)) +
             (tie ? " tie-rate" : " win-rate (row over column)") + "\n";
      std::vector<std::vector<std::string>> rows;
      std::vector<std::string> header = {""};
      for (const auto& name : m.models) header.push_back(ModelLabel(name));
      rows.push_back(header);
      for (size_t i = 0; i < m.models.size(); ++i) {
        std::vector<std::string> row = {ModelLabel(m.models[i])};
        for (size_t j = 0; j < m.models.size(); ++j) {
          const auto& cell = m.cells[i][j];
          row.push_back(!cell ? "-"
                              : FormatHundredths(tie ? cell->tie_hundredths
                                                     : cell->win_a_hundredths));
        }
        rows.push_back(row);
      }
      out += AlignRows(rows) + "\n";
    }
  }
  return out;
}

std::string RenderAgreement(std::span<const AgreementReport> reports,
                            TableFormat format) {
  std::vector<std::vector<std::string>> rows;
  if (format == TableFormat::kCsv) {
    rows.push_back({"dimension", "average_alpha", "pairs", "excluded_pairs"});
  } else {
    rows.push_back({"dimension", "alpha", "pairs", "excluded"});
  }
  for (const auto& r : reports) {
    char buf[32];
    std::snprintf(buf, sizeof buf,
                  format == TableFormat::kCsv ? "%.6f" : "%.2f",
                  r.average_alpha);
    rows.push_back({r.dimension, buf, std::to_string(r.pairs.size()),
                    std::to_string(r.excluded_pairs.size())});
  }
  std::string out = Render(rows, format);
  if (format == TableFormat::kText && !reports.empty()) {
    std::vector<std::string> parts;
    for (const auto& r : reports) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f", r.average_alpha);
      parts.push_back(r.dimension + " " + buf);
    }
    out += "\naverage alpha: " + Join(parts, ", ") + "\n";
  }
  return out;
}

std::string RenderCategories(const CategoryReport& report, TableFormat format) {
  std::vector<std::vector<std::string>> rows;
  if (format == TableFormat::kCsv) {
    rows.push_back({"dimension", "label", "count", "percent"});
  }
  for (const auto* dist : {&report.category, &report.skill}) {
    if (!*dist) continue;
    const Distribution& d = **dist;
    if (format == TableFormat::kText) {
      rows.push_back({std::string(DimensionName(d.dimension)) + " (n=" +
                      std::to_string(d.total) + ")"});
    }
    for (size_t i = 0; i < d.labels.size(); ++i) {
      if (format == TableFormat::kCsv) {
        rows.push_back({std::string(DimensionName(d.dimension)), d.labels[i],
                        std::to_string(d.counts[i]),
                        FormatHundredths(d.hundredths[i])});
      } else {
        rows.push_back({"  " + d.labels[i], std::to_string(d.counts[i]),
                        FormatHundredths(d.hundredths[i])});
      }
    }
  }
  return Render(rows, format);
}

}  // namespace instructkit
