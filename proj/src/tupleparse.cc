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

#include "instructkit/tupleparse.h"

#include <array>
#include <cctype>
#include <optional>
#include <set>

namespace instructkit {

namespace {

enum class Field {
  kInstruction,
  kInput,
  kOutput,
  kExplanation,
  kEvaluation,
  kReason,
  kCount
};

constexpr std::array<std::string_view, static_cast<size_t>(Field::kCount)>
    kFieldNames = {"instruction", "input",      "output",
                   "explanation", "evaluation", "reason"};

struct Header {
  int number = -1;
  Field field;
  std::string_view rest;
};

bool IsBlank(char c) { return c == ' ' || c == '\t'; }

// "[N. ]Field: rest" with N. optional and Field case-insensitive.
std::optional<Header> ParseHeader(std::string_view line) {
  size_t p = 0;
  while (p < line.size() && IsBlank(line[p])) ++p;
  Header h;
  size_t digits_begin = p;
  while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p])) &&
         p - digits_begin < 9) {
    ++p;
  }
  if (p > digits_begin) {
    h.number = std::stoi(std::string(line.substr(digits_begin, p - digits_begin)));
    while (p < line.size() && IsBlank(line[p])) ++p;
    if (p >= line.size() || (line[p] != '.' && line[p] != ')')) {
      return std::nullopt;
    }
    ++p;
    while (p < line.size() && IsBlank(line[p])) ++p;
  }
  for (size_t f = 0; f < kFieldNames.size(); ++f) {
    std::string_view name = kFieldNames[f];
    if (line.size() - p < name.size() ||
        !EqualsIgnoreCase(line.substr(p, name.size()), name)) {
      continue;
    }
    size_t q = p + name.size();
    while (q < line.size() && IsBlank(line[q])) ++q;
    if (q >= line.size() || line[q] != ':') continue;
    h.field = static_cast<Field>(f);
    h.rest = Trim(line.substr(q + 1));
    return h;
  }
  return std::nullopt;
}

enum class SegmentKind { kSeparator, kHeader, kContent };

struct Segment {
  SegmentKind kind;
  std::string_view text;  // the whole segment for content
  Header header{};
};

// Breaks the reply into separators, headers and content lines. An inline
// "###" followed by a header (the single-line training layout) becomes a
// line break; a "###" ending a line becomes a separator.
std::vector<Segment> SegmentLines(std::string_view text, bool& saw_inline) {
  std::vector<Segment> out;
  for (std::string_view line : SplitLines(text)) {
    if (Trim(line) == "###") {
      out.push_back({SegmentKind::kSeparator, line});
      continue;
    }
    std::vector<std::string_view> pieces;
    std::string_view rest = line;
    bool trailing_separator = false;
    while (true) {
      size_t split = std::string_view::npos;
      for (size_t pos = rest.find("###"); pos != std::string_view::npos;
           pos = rest.find("###", pos + 3)) {
        std::string_view after = rest.substr(pos + 3);
        if (Trim(after).empty()) {
          trailing_separator = true;
          split = pos;
          break;
        }
        if (ParseHeader(after)) {
          split = pos;
          break;
        }
      }
      if (split == std::string_view::npos) {
        pieces.push_back(rest);
        break;
      }
      pieces.push_back(rest.substr(0, split));
      if (trailing_separator) break;
      saw_inline = true;
      rest = rest.substr(split + 3);
    }
    for (std::string_view piece : pieces) {
      if (pieces.size() > 1 && Trim(piece).empty()) continue;
      if (auto h = ParseHeader(piece)) {
        out.push_back({SegmentKind::kHeader, piece, *h});
      } else {
        out.push_back({SegmentKind::kContent, piece});
      }
    }
    if (trailing_separator) out.push_back({SegmentKind::kSeparator, "###"});
  }
  return out;
}

struct Block {
  std::array<std::optional<std::vector<std::string_view>>,
             static_cast<size_t>(Field::kCount)>
      fields;
  std::vector<std::string_view> orphan;
  int number = -1;
  bool renumbered_inside = false;

  bool HasAnyField() const {
    for (const auto& f : fields) {
      if (f) return true;
    }
    return false;
  }
  bool HasContent() const {
    if (HasAnyField()) return true;
    for (auto l : orphan) {
      if (!Trim(l).empty()) return true;
    }
    return false;
  }
  bool Has(Field f) const { return fields[static_cast<size_t>(f)].has_value(); }
  std::string Value(Field f) const {
    const auto& lines = fields[static_cast<size_t>(f)];
    if (!lines) return {};
    std::string joined;
    for (size_t i = 0; i < lines->size(); ++i) {
      if (i > 0) joined += '\n';
      joined += (*lines)[i];
    }
    return std::string(Trim(joined));
  }
  std::string OrphanText() const {
    std::string joined;
    for (size_t i = 0; i < orphan.size(); ++i) {
      if (i > 0) joined += '\n';
      joined += orphan[i];
    }
    return std::string(Trim(joined));
  }
};

std::vector<Block> SplitBlocks(std::string_view text, ParseDiagnostics& diag) {
  bool saw_inline = false;
  std::vector<Segment> segments = SegmentLines(text, saw_inline);
  if (saw_inline) diag.warnings.push_back("inline ### separators present");

  std::vector<Block> blocks;
  Block current;
  std::optional<Field> open_field;
  auto finish = [&]() {
    if (current.HasContent()) blocks.push_back(std::move(current));
    current = Block();
    open_field.reset();
  };
  for (const auto& seg : segments) {
    switch (seg.kind) {
      case SegmentKind::kSeparator:
        finish();
        break;
      case SegmentKind::kHeader: {
        const Field f = seg.header.field;
        if ((f == Field::kInstruction && current.HasAnyField()) ||
            current.Has(f)) {
          finish();
        }
        current.fields[static_cast<size_t>(f)] =
            std::vector<std::string_view>{seg.header.rest};
        if (seg.header.number >= 0) {
          if (current.number < 0) {
            current.number = seg.header.number;
          } else if (current.number != seg.header.number) {
            current.renumbered_inside = true;
          }
        }
        open_field = f;
        break;
      }
      case SegmentKind::kContent:
        if (open_field) {
          current.fields[static_cast<size_t>(*open_field)]->push_back(seg.text);
        } else {
          current.orphan.push_back(seg.text);
        }
        break;
    }
  }
  finish();
  diag.blocks_seen = blocks.size();
  return blocks;
}

void Drop(ParseDiagnostics& diag, size_t index, std::string reason) {
  diag.dropped.push_back({index, std::move(reason)});
}

}  // namespace

ParsedTuples ParseGeneratedTuples(std::string_view text,
                                  int expected_first_index,
                                  const GeneratedParseOptions& options) {
  ParsedTuples result;
  ParseDiagnostics& diag = result.diagnostics;
  std::vector<Block> blocks = SplitBlocks(text, diag);

  for (size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (options.truncated && i + 1 == blocks.size()) {
      Drop(diag, i, "truncated");
      continue;
    }
    std::string instruction = b.Value(Field::kInstruction);
    if (!b.Has(Field::kInstruction) && i == 0) {
      // The prompt ends with "N. Instruction:", so the reply may open with
      // the bare instruction text.
      instruction = b.OrphanText();
    } else if (!b.OrphanText().empty()) {
      diag.warnings.push_back("block " + std::to_string(i) +
                              ": text outside any field ignored");
    }
    if (instruction.empty()) {
      Drop(diag, i, "missing instruction");
      continue;
    }
    std::string output = b.Value(Field::kOutput);
    if (output.empty()) {
      Drop(diag, i, "missing output");
      continue;
    }
    const int expected = expected_first_index + static_cast<int>(i);
    if ((b.number >= 0 && b.number != expected) || b.renumbered_inside) {
      diag.warnings.push_back("block " + std::to_string(i) + " numbered " +
                              std::to_string(b.number) + ", expected " +
                              std::to_string(expected) + " (position used)");
    }
    const int position = static_cast<int>(result.tuples.size()) + 1;
    result.tuples.push_back(MakeGeneratedTuple(
        MakeTupleId(Provenance::kGenerated, options.round, position),
        options.round, instruction, b.Value(Field::kInput), output,
        b.Value(Field::kExplanation),
        InferLengthClass(output, options.long_min_words)));
    ++diag.blocks_parsed;
  }
  return result;
}

ParsedVerdicts ParseFiltrationVerdicts(std::string_view text,
                                       std::span<const int> expected_indices) {
  ParsedVerdicts result;
  ParseDiagnostics& diag = result.diagnostics;
  std::vector<Block> blocks = SplitBlocks(text, diag);
  const std::set<int> expected(expected_indices.begin(),
                               expected_indices.end());
  std::set<int> claimed;
  size_t verdict_position = 0;

  for (size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (!b.Has(Field::kEvaluation)) {
      Drop(diag, i, "no evaluation line");
      continue;
    }
    std::string evaluation = ToLowerAscii(b.Value(Field::kEvaluation));
    size_t p = 0;
    while (p < evaluation.size() &&
           !std::isalpha(static_cast<unsigned char>(evaluation[p]))) {
      ++p;
    }
    std::string_view word = std::string_view(evaluation).substr(p);
    Verdict v;
    if (StartsWith(word, "accept")) {
      v.decision = Decision::kAccept;
    } else if (StartsWith(word, "reject")) {
      v.decision = Decision::kReject;
    } else {
      Drop(diag, i, "unrecognized evaluation '" + b.Value(Field::kEvaluation) +
                        "'");
      continue;
    }
    const size_t position = verdict_position++;
    if (b.number >= 0 && expected.count(b.number) && !claimed.count(b.number)) {
      v.index = b.number;
    } else if (position < expected_indices.size() &&
               !claimed.count(expected_indices[position])) {
      v.index = expected_indices[position];
      if (b.number >= 0) {
        diag.warnings.push_back("block " + std::to_string(i) + " numbered " +
                                std::to_string(b.number) + ", assigned " +
                                std::to_string(v.index) + " by position");
      }
    } else {
      Drop(diag, i, "no candidate index for verdict");
      continue;
    }
    claimed.insert(v.index);
    v.reason = b.Value(Field::kReason);
    if (v.decision == Decision::kReject && v.reason.empty()) {
      v.reason = "no reason given";
    }
    result.verdicts.push_back(std::move(v));
    ++diag.blocks_parsed;
  }
  for (int idx : expected_indices) {
    if (!claimed.count(idx)) diag.missing_indices.push_back(idx);
  }
  return result;
}

OutputExplanation SplitOutputExplanation(std::string_view completion) {
  OutputExplanation out;
  size_t pos = completion.find("###");
  if (pos == std::string_view::npos) {
    out.output = std::string(Trim(completion));
    return out;
  }
  out.output = std::string(Trim(completion.substr(0, pos)));
  std::string_view right = Trim(completion.substr(pos + 3));
  constexpr std::string_view kLabel = "explanation";
  if (right.size() >= kLabel.size() &&
      EqualsIgnoreCase(right.substr(0, kLabel.size()), kLabel)) {
    std::string_view after = Trim(right.substr(kLabel.size()));
    if (!after.empty() && after.front() == ':') {
      right = Trim(after.substr(1));
    }
  }
  out.explanation = std::string(right);
  return out;
}

}  // namespace instructkit
