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

#ifndef INSTRUCTKIT_CORPUS_H_
#define INSTRUCTKIT_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/util.h"

namespace instructkit {

inline constexpr std::string_view kNoInput = "<noinput>";

enum class Provenance { kSeed, kGenerated };
enum class LengthClass { kShort, kLong };

std::string_view ProvenanceName(Provenance p);
std::string_view LengthClassName(LengthClass c);
std::optional<Provenance> ParseProvenance(std::string_view s);
std::optional<LengthClass> ParseLengthClass(std::string_view s);

// One <instruction, input, output, explanation> record.
struct InstructionTuple {
  std::string id;
  std::string instruction;
  std::string input{kNoInput};
  std::string output;
  std::string explanation;
  Provenance provenance = Provenance::kSeed;
  LengthClass length_class = LengthClass::kShort;
  int round = 0;
  Timestamp created_at{};

  bool operator==(const InstructionTuple&) const = default;
};

// Maps every spelling of "no input" ("<noinput>", "noinput", "no-input",
// "no input", empty; any case, trailing punctuation ignored) to kNoInput.
// Other text is trimmed and otherwise returned unchanged.
std::string CanonicalizeInput(std::string_view raw);

// Long when the output has at least `long_min_words` whitespace-separated
// words or spans several nonblank lines.
LengthClass InferLengthClass(std::string_view output,
                             size_t long_min_words = 30);

// "<provenance>-<round>-<sequence>".
std::string MakeTupleId(Provenance provenance, int round, int sequence);

// Builds a tuple with trimmed text fields and a canonical input.
InstructionTuple MakeSeedTuple(std::string id, std::string_view instruction,
                               std::string_view input, std::string_view output,
                               std::string_view explanation,
                               LengthClass length_class,
                               Timestamp created_at = {});
InstructionTuple MakeGeneratedTuple(std::string id, int round,
                                    std::string_view instruction,
                                    std::string_view input,
                                    std::string_view output,
                                    std::string_view explanation,
                                    LengthClass length_class,
                                    Timestamp created_at = {});

// Empty result means the tuple is valid.
std::vector<std::string> ValidateTuple(const InstructionTuple& t);

// JSON object text for one tuple, fields in schema order, no newline.
std::string TupleToJsonLine(const InstructionTuple& t);
// Parses and validates one record. `line_number` only decorates errors.
// A missing id is left empty for the caller to assign.
InstructionTuple TupleFromJsonLine(std::string_view line, size_t line_number);

// Loads a JSONL file. Errors carry the offending line number; duplicate ids
// are rejected. Records without an id get MakeTupleId(provenance, round, n)
// where n is the 1-based line number.
std::vector<InstructionTuple> LoadTuples(const std::filesystem::path& path);
std::vector<InstructionTuple> ParseTuplesJsonl(std::string_view text,
                                               std::string_view origin);

struct WriteResult {
  size_t count = 0;
};

// Whole-file write. Every tuple must validate.
WriteResult WriteTuples(const std::vector<InstructionTuple>& tuples,
                        const std::filesystem::path& path);
std::string TuplesToJsonl(const std::vector<InstructionTuple>& tuples);

class SeedCorpus {
 public:
  // Throws ValidationError unless every tuple is a seed, ids are unique and
  // both length classes are present.
  explicit SeedCorpus(std::vector<InstructionTuple> tuples);
  static SeedCorpus Load(const std::filesystem::path& path);

  const std::vector<InstructionTuple>& tuples() const { return tuples_; }
  size_t size() const { return tuples_.size(); }
  size_t short_count() const { return short_.size(); }
  size_t long_count() const { return long_.size(); }
  // Indices into tuples() for one class, in file order.
  const std::vector<size_t>& indices(LengthClass c) const {
    return c == LengthClass::kShort ? short_ : long_;
  }

 private:
  std::vector<InstructionTuple> tuples_;
  std::vector<size_t> short_;
  std::vector<size_t> long_;
};

enum class FilterStage { kBlocklist, kDiscriminator, kDedup };
std::string_view FilterStageName(FilterStage s);

struct DatasetManifest {
  uint64_t total_generated = 0;
  uint64_t total_accepted = 0;
  std::map<FilterStage, uint64_t> rejected_by_stage{
      {FilterStage::kBlocklist, 0},
      {FilterStage::kDiscriminator, 0},
      {FilterStage::kDedup, 0}};
  std::string config_fingerprint;
  uint64_t rng_seed = 0;
  int rounds_completed = 0;
  bool target_reached = false;

  uint64_t total_rejected() const;
  // Share of discriminator-reviewed tuples it rejected. Reported only.
  double discriminator_rejection_rate() const;
  std::vector<std::string> Validate() const;
  std::string ToJson() const;
  static DatasetManifest FromJson(std::string_view text);
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_CORPUS_H_
