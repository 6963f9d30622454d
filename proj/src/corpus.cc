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

#include "instructkit/corpus.h"

#include <set>
#include <unordered_set>

#include "instructkit/error.h"
#include "json.hpp"

namespace instructkit {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kFields[] = {
    "id",     "instruction", "input",        "output",    "explanation",
    "provenance", "length_class", "round", "created_at"};

std::string_view StripSentinelPunctuation(std::string_view s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ',' ||
                        s.back() == ';' || s.back() == ':' || s.back() == '!')) {
    s.remove_suffix(1);
  }
  return Trim(s);
}

std::string OptionalString(const nlohmann::json& obj, const char* key,
                           const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view ProvenanceName(Provenance p) {
  return p == Provenance::kSeed ? "seed" : "generated";
}

std::string_view LengthClassName(LengthClass c) {
  return c == LengthClass::kShort ? "short" : "long";
}

std::optional<Provenance> ParseProvenance(std::string_view s) {
  if (s == "seed") return Provenance::kSeed;
  if (s == "generated") return Provenance::kGenerated;
  return std::nullopt;
}

std::optional<LengthClass> ParseLengthClass(std::string_view s) {
  if (s == "short") return LengthClass::kShort;
  if (s == "long") return LengthClass::kLong;
  return std::nullopt;
}

std::string_view FilterStageName(FilterStage s) {
  switch (s) {
    case FilterStage::kBlocklist:
      return "blocklist";
    case FilterStage::kDiscriminator:
      return "discriminator";
    case FilterStage::kDedup:
      return "dedup";
  }
  return "unknown";
}

std::string CanonicalizeInput(std::string_view raw) {
  std::string_view trimmed = Trim(raw);
  std::string key = ToLowerAscii(StripSentinelPunctuation(trimmed));
  if (key.empty() || key == "<noinput>" || key == "noinput" ||
      key == "no-input" || key == "no input") {
    return std::string(kNoInput);
  }
  return std::string(trimmed);
}

LengthClass InferLengthClass(std::string_view output, size_t long_min_words) {
  size_t words = 0;
  size_t nonblank_lines = 0;
  for (std::string_view line : SplitLines(output)) {
    if (!Trim(line).empty()) ++nonblank_lines;
    bool in_word = false;
    for (char c : line) {
      bool space = c == ' ' || c == '\t' || c == '\r';
      if (!space && !in_word) ++words;
      in_word = !space;
    }
  }
  return words >= long_min_words || nonblank_lines > 2 ? LengthClass::kLong
                                                       : LengthClass::kShort;
}

std::string MakeTupleId(Provenance provenance, int round, int sequence) {
  return std::string(ProvenanceName(provenance)) + "-" +
         std::to_string(round) + "-" + std::to_string(sequence);
}

InstructionTuple MakeSeedTuple(std::string id, std::string_view instruction,
                               std::string_view input, std::string_view output,
                               std::string_view explanation,
                               LengthClass length_class, Timestamp created_at) {
  InstructionTuple t;
  t.id = std::move(id);
  t.instruction = std::string(Trim(instruction));
  t.input = CanonicalizeInput(input);
  t.output = std::string(Trim(output));
  t.explanation = std::string(Trim(explanation));
  t.provenance = Provenance::kSeed;
  t.length_class = length_class;
  t.round = 0;
  t.created_at = created_at;
  return t;
}

InstructionTuple MakeGeneratedTuple(std::string id, int round,
                                    std::string_view instruction,
                                    std::string_view input,
                                    std::string_view output,
                                    std::string_view explanation,
                                    LengthClass length_class,
                                    Timestamp created_at) {
  InstructionTuple t =
      MakeSeedTuple(std::move(id), instruction, input, output, explanation,
                    length_class, created_at);
  t.provenance = Provenance::kGenerated;
  t.round = round;
  return t;
}

std::vector<std::string> ValidateTuple(const InstructionTuple& t) {
  std::vector<std::string> violations;
  if (t.id.empty()) violations.push_back("id empty");
  if (Trim(t.instruction).empty()) violations.push_back("instruction empty");
  if (Trim(t.output).empty()) violations.push_back("output empty");
  if (t.input.empty()) violations.push_back("input empty (use <noinput>)");
  if (t.round < 0) violations.push_back("round negative");
  if ((t.provenance == Provenance::kSeed) != (t.round == 0)) {
    violations.push_back("round/provenance mismatch");
  }
  return violations;
}

std::string TupleToJsonLine(const InstructionTuple& t) {
  ordered_json j;
  j["id"] = t.id;
  j["instruction"] = t.instruction;
  j["input"] = t.input;
  j["output"] = t.output;
  j["explanation"] = t.explanation;
  j["provenance"] = ProvenanceName(t.provenance);
  j["length_class"] = LengthClassName(t.length_class);
  j["round"] = t.round;
  j["created_at"] = FormatRfc3339(t.created_at);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

InstructionTuple TupleFromJsonLine(std::string_view line, size_t line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(where + "malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ValidationError(where + "record is not an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view f : kFields) known = known || key == f;
    if (!known) throw ValidationError(where + "unknown field '" + key + "'");
  }
  try {
    InstructionTuple t;
    if (!j.contains("instruction")) {
      throw ValidationError("missing field 'instruction'");
    }
    if (!j.contains("output")) throw ValidationError("missing field 'output'");
    t.id = OptionalString(j, "id", "");
    t.instruction = std::string(Trim(OptionalString(j, "instruction", "")));
    t.input = CanonicalizeInput(OptionalString(j, "input", ""));
    t.output = std::string(Trim(OptionalString(j, "output", "")));
    t.explanation = std::string(Trim(OptionalString(j, "explanation", "")));

    std::string prov = OptionalString(j, "provenance", "seed");
    auto p = ParseProvenance(prov);
    if (!p) throw ValidationError("bad provenance '" + prov + "'");
    t.provenance = *p;

    if (!j.contains("length_class")) {
      throw ValidationError("missing field 'length_class'");
    }
    std::string lc = OptionalString(j, "length_class", "");
    auto c = ParseLengthClass(lc);
    if (!c) throw ValidationError("bad length_class '" + lc + "'");
    t.length_class = *c;

    if (auto it = j.find("round"); it != j.end()) {
      if (!it->is_number_integer()) {
        throw ValidationError("field 'round' must be an integer");
      }
      t.round = it->get<int>();
    }
    std::string ts = OptionalString(j, "created_at", "");
    if (!ts.empty()) t.created_at = ParseRfc3339(ts);

    auto violations = ValidateTuple(t);
    std::erase(violations, "id empty");
    if (!violations.empty()) throw ValidationError(Join(violations, "; "));
    return t;
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
}

std::vector<InstructionTuple> ParseTuplesJsonl(std::string_view text,
                                               std::string_view origin) {
  std::vector<InstructionTuple> tuples;
  std::unordered_set<std::string> ids;
  size_t line_number = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    InstructionTuple t;
    try {
      t = TupleFromJsonLine(line, line_number);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(origin) + ": " + e.what());
    }
    if (t.id.empty()) {
      t.id = MakeTupleId(t.provenance, t.round, static_cast<int>(line_number));
    }
    if (!ids.insert(t.id).second) {
      throw ValidationError(std::string(origin) + ": line " +
                            std::to_string(line_number) + ": duplicate id '" +
                            t.id + "'");
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

std::vector<InstructionTuple> LoadTuples(const std::filesystem::path& path) {
  return ParseTuplesJsonl(ReadFile(path), path.string());
}

std::string TuplesToJsonl(const std::vector<InstructionTuple>& tuples) {
  std::string out;
  for (const auto& t : tuples) {
    out += TupleToJsonLine(t);
    out += '\n';
  }
  return out;
}

WriteResult WriteTuples(const std::vector<InstructionTuple>& tuples,
                        const std::filesystem::path& path) {
  for (const auto& t : tuples) {
    auto v = ValidateTuple(t);
    if (!v.empty()) {
      throw ValidationError("tuple '" + t.id + "': " + Join(v, "; "));
    }
  }
  WriteFileAtomic(path, TuplesToJsonl(tuples));
  return WriteResult{tuples.size()};
}

SeedCorpus::SeedCorpus(std::vector<InstructionTuple> tuples)
    : tuples_(std::move(tuples)) {
  std::set<std::string> ids;
  for (size_t i = 0; i < tuples_.size(); ++i) {
    const auto& t = tuples_[i];
    if (t.provenance != Provenance::kSeed) {
      throw ValidationError("seed corpus contains non-seed tuple '" + t.id +
                            "'");
    }
    auto v = ValidateTuple(t);
    if (!v.empty()) {
      throw ValidationError("seed '" + t.id + "': " + Join(v, "; "));
    }
    if (!ids.insert(t.id).second) {
      throw ValidationError("duplicate seed id '" + t.id + "'");
    }
    (t.length_class == LengthClass::kShort ? short_ : long_).push_back(i);
  }
  if (short_.empty()) throw ValidationError("seed corpus has no short tasks");
  if (long_.empty()) throw ValidationError("seed corpus has no long tasks");
}

SeedCorpus SeedCorpus::Load(const std::filesystem::path& path) {
  return SeedCorpus(LoadTuples(path));
}

uint64_t DatasetManifest::total_rejected() const {
  uint64_t sum = 0;
  for (const auto& [stage, n] : rejected_by_stage) sum += n;
  return sum;
}

double DatasetManifest::discriminator_rejection_rate() const {
  uint64_t reviewed =
      total_generated - rejected_by_stage.at(FilterStage::kBlocklist);
  if (reviewed == 0) return 0.0;
  return static_cast<double>(rejected_by_stage.at(FilterStage::kDiscriminator)) /
         static_cast<double>(reviewed);
}

std::vector<std::string> DatasetManifest::Validate() const {
  std::vector<std::string> v;
  if (total_accepted > total_generated) {
    v.push_back("total_accepted exceeds total_generated");
  } else if (total_rejected() != total_generated - total_accepted) {
    v.push_back("stage rejections do not sum to generated - accepted");
  }
  return v;
}

std::string DatasetManifest::ToJson() const {
  ordered_json j;
  j["total_generated"] = total_generated;
  j["total_accepted"] = total_accepted;
  ordered_json stages;
  for (const auto& [stage, n] : rejected_by_stage) {
    stages[std::string(FilterStageName(stage))] = n;
  }
  j["rejected_by_stage"] = stages;
  j["discriminator_rejection_rate"] =
      std::stod(FormatFixed2(100.0 * discriminator_rejection_rate())) / 100.0;
  j["rounds_completed"] = rounds_completed;
  j["target_reached"] = target_reached;
  j["config_fingerprint"] = config_fingerprint;
  j["rng_seed"] = rng_seed;
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::FromJson(std::string_view text) {
  DatasetManifest m;
  try {
    auto j = nlohmann::json::parse(text);
    m.total_generated = j.at("total_generated").get<uint64_t>();
    m.total_accepted = j.at("total_accepted").get<uint64_t>();
    for (FilterStage s : {FilterStage::kBlocklist, FilterStage::kDiscriminator,
                          FilterStage::kDedup}) {
      m.rejected_by_stage[s] =
          j.at("rejected_by_stage").at(std::string(FilterStageName(s)))
              .get<uint64_t>();
    }
    m.rounds_completed = j.at("rounds_completed").get<int>();
    m.target_reached = j.value("target_reached", false);
    m.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.rng_seed = j.at("rng_seed").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  auto v = m.Validate();
  if (!v.empty()) throw ValidationError("manifest: " + Join(v, "; "));
  return m;
}

}  // namespace instructkit
