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

#ifndef INSTRUCTKIT_TUPLEPARSE_H_
#define INSTRUCTKIT_TUPLEPARSE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/corpus.h"

namespace instructkit {

// Parsers for model replies. They never throw on content: everything that
// cannot be recovered is reported through ParseDiagnostics.

struct DroppedBlock {
  size_t block_index = 0;  // 0-based among blocks seen
  std::string reason;
};

struct ParseDiagnostics {
  size_t blocks_seen = 0;
  size_t blocks_parsed = 0;
  std::vector<DroppedBlock> dropped;
  // Recoverable oddities: renumbered blocks, inline separators, orphan text.
  std::vector<std::string> warnings;
  // Filtration only: expected indices that received no verdict.
  std::vector<int> missing_indices;

  // blocks_parsed + dropped.size() == blocks_seen.
  bool Consistent() const {
    return blocks_parsed + dropped.size() == blocks_seen;
  }
};

struct GeneratedParseOptions {
  // Stamped on every tuple; ids are "generated-<round>-<position>".
  int round = 1;
  // The completion stopped at the token limit: its last block is dropped.
  bool truncated = false;
  size_t long_min_words = 30;
};

struct ParsedTuples {
  std::vector<InstructionTuple> tuples;
  ParseDiagnostics diagnostics;
};

// Splits on "###" lines, reads "N. Instruction:/Input:/Output:/Explanation:"
// headers (number optional, names case-insensitive, values may span lines).
// Block numbers are checked against expected_first_index + position but
// position always wins.
ParsedTuples ParseGeneratedTuples(std::string_view text,
                                  int expected_first_index,
                                  const GeneratedParseOptions& options = {});

enum class Decision { kAccept, kReject };

struct Verdict {
  int index = 0;
  Decision decision = Decision::kReject;
  std::string reason;  // nonempty for kReject
};

struct ParsedVerdicts {
  std::vector<Verdict> verdicts;
  ParseDiagnostics diagnostics;
};

// One verdict per block that carries an "Evaluation:" line. The block's own
// number is used when it is an expected, unclaimed index; otherwise the
// verdict's position selects from expected_indices.
ParsedVerdicts ParseFiltrationVerdicts(std::string_view text,
                                       std::span<const int> expected_indices);

struct OutputExplanation {
  std::string output;
  std::string explanation;
};

// Splits an inference completion at its first "###". A leading
// "Explanation:" label on the right side is removed. Without a separator the
// explanation is empty.
OutputExplanation SplitOutputExplanation(std::string_view completion);

}  // namespace instructkit

#endif  // INSTRUCTKIT_TUPLEPARSE_H_
