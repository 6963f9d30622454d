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

#include <string>

#include "doctest.h"
#include "instructkit/prompting.h"
#include "instructkit/random.h"
#include "instructkit/tupleparse.h"
#include "synthetic_llm.h"

namespace ik = instructkit;

TEST_SUITE("tupleparse") {
  TEST_CASE("continuation after the instruction cue") {
    std::string text =
        " Rewrite the sentence in passive voice.\n"
        "5. Input: The cat chased the mouse.\n"
        "5. Output: The mouse was chased by the cat.\n"
        "5. Explanation: The object becomes the subject.\n"
        "###\n"
        "6. Instruction: Give an antonym.\n"
        "6. Input: happy\n"
        "6. Output: sad\n"
        "6. Explanation: Opposite meaning.\n";
    auto r = ik::ParseGeneratedTuples(text, 5, {.round = 2});
    REQUIRE(r.tuples.size() == 2);
    CHECK(r.tuples[0].instruction == "Rewrite the sentence in passive voice.");
    CHECK(r.tuples[0].input == "The cat chased the mouse.");
    CHECK(r.tuples[0].output == "The mouse was chased by the cat.");
    CHECK(r.tuples[0].explanation == "The object becomes the subject.");
    CHECK(r.tuples[0].id == "generated-2-1");
    CHECK(r.tuples[1].id == "generated-2-2");
    CHECK(r.tuples[1].round == 2);
    CHECK(r.tuples[1].provenance == ik::Provenance::kGenerated);
    CHECK(r.diagnostics.blocks_seen == 2);
    CHECK(r.diagnostics.Consistent());
    CHECK(r.diagnostics.warnings.empty());
  }

  TEST_CASE("unnumbered and case-insensitive headers, multi-line values") {
    std::string text =
        "Instruction: Write a dialogue.\n"
        "input: <noinput>\n"
        "OUTPUT: A: Hi.\nB: Hello.\nA: Bye.\n"
        "Explanation: Greetings.\n";
    auto r = ik::ParseGeneratedTuples(text, 1);
    REQUIRE(r.tuples.size() == 1);
    CHECK(r.tuples[0].output == "A: Hi.\nB: Hello.\nA: Bye.");
    CHECK(r.tuples[0].input == "<noinput>");
    CHECK(r.tuples[0].length_class == ik::LengthClass::kLong);
  }

  TEST_CASE("sentinel inputs are canonicalized") {
    auto r = ik::ParseGeneratedTuples(
        "Instruction: Say hi.\nInput: no-input.\nOutput: Hi.\n", 1);
    REQUIRE(r.tuples.size() == 1);
    CHECK(r.tuples[0].input == "<noinput>");
    auto r2 = ik::ParseGeneratedTuples("Instruction: Say hi.\nOutput: Hi.\n", 1);
    REQUIRE(r2.tuples.size() == 1);
    CHECK(r2.tuples[0].input == "<noinput>");
  }

  TEST_CASE("blocks missing fields are dropped with reasons") {
    std::string text =
        "1. Instruction: Good one.\n1. Output: ok\n###\n"
        "2. Input: lonely input\n2. Output: no instruction\n###\n"
        "3. Instruction: No output here.\n###\n"
        "4. Instruction: Fine.\n4. Output: yes\n";
    auto r = ik::ParseGeneratedTuples(text, 1);
    CHECK(r.tuples.size() == 2);
    REQUIRE(r.diagnostics.dropped.size() == 2);
    CHECK(r.diagnostics.dropped[0].block_index == 1);
    CHECK(r.diagnostics.dropped[0].reason == "missing instruction");
    CHECK(r.diagnostics.dropped[1].reason == "missing output");
    CHECK(r.diagnostics.Consistent());
    CHECK(r.tuples[1].id == "generated-1-2");
  }

  TEST_CASE("truncated completion drops the last block") {
    std::string text =
        "1. Instruction: A.\n1. Output: a\n###\n2. Instruction: B.\n2. Output: b";
    auto r = ik::ParseGeneratedTuples(text, 1, {.truncated = true});
    CHECK(r.tuples.size() == 1);
    REQUIRE(r.diagnostics.dropped.size() == 1);
    CHECK(r.diagnostics.dropped[0].reason == "truncated");
  }

  TEST_CASE("position wins over printed numbering") {
    std::string text =
        "7. Instruction: A.\n7. Output: a\n###\n7. Instruction: B.\n7. Output: b\n";
    auto r = ik::ParseGeneratedTuples(text, 5);
    REQUIRE(r.tuples.size() == 2);
    CHECK(r.tuples[1].instruction == "B.");
    CHECK_FALSE(r.diagnostics.warnings.empty());
  }

  TEST_CASE("inline separators and header-driven splits") {
    std::string text =
        "1. Instruction: A.\n1. Output: a ###\n2. Instruction: B.\n2. Output: b\n"
        "3. Instruction: C.\n3. Output: c\n";
    auto r = ik::ParseGeneratedTuples(text, 1);
    REQUIRE(r.tuples.size() == 3);
    CHECK(r.tuples[0].output == "a");
    CHECK(r.tuples[2].instruction == "C.");
    auto sft_like = ik::ParseGeneratedTuples(
        "### Instruction: A. ### Input: x ### Output: y ### Explanation: z", 1);
    REQUIRE(sft_like.tuples.size() == 1);
    CHECK(sft_like.tuples[0].instruction == "A.");
    CHECK(sft_like.tuples[0].input == "x");
    CHECK(sft_like.tuples[0].output == "y");
    CHECK(sft_like.tuples[0].explanation == "z");
  }

  TEST_CASE("empty and whitespace input") {
    auto r = ik::ParseGeneratedTuples("", 1);
    CHECK(r.tuples.empty());
    CHECK(r.diagnostics.Consistent());
    auto r2 = ik::ParseGeneratedTuples("\n###\n  \n###\n", 1);
    CHECK(r2.tuples.empty());
    CHECK(r2.diagnostics.Consistent());
  }

  TEST_CASE("round trip of rendered blocks") {
    ik::Rng rng(99);
    std::vector<ik::InstructionTuple> tuples;
    for (int i = 0; i < 30; ++i) {
      auto t = ik::MakeGeneratedTuple(
          "x" + std::to_string(i), 1, ik::testing::RandomSentence(rng, 6),
          i % 3 ? ik::testing::RandomSentence(rng, 4) : "<noinput>",
          ik::testing::RandomSentence(rng, 3) + "\n" +
              ik::testing::RandomSentence(rng, 3),
          ik::testing::RandomSentence(rng, 5), ik::LengthClass::kShort);
      tuples.push_back(t);
    }
    auto r = ik::ParseGeneratedTuples(ik::RenderExampleBlocks(tuples, 5), 5);
    REQUIRE(r.tuples.size() == tuples.size());
    for (size_t i = 0; i < tuples.size(); ++i) {
      CHECK(r.tuples[i].instruction == tuples[i].instruction);
      CHECK(r.tuples[i].input == tuples[i].input);
      CHECK(r.tuples[i].output == tuples[i].output);
      CHECK(r.tuples[i].explanation == tuples[i].explanation);
    }
    CHECK(r.diagnostics.warnings.empty());
  }

  TEST_CASE("filtration verdicts") {
    std::string text =
        "6. Instruction: A.\nInput: x\nOutput: y\nEvaluation: Accept.\n"
        "Reason: fine.\n###\n"
        "7. Instruction: B.\nEvaluation: Reject.\nReason: factual.\n###\n"
        "8. Instruction: C.\nEvaluation: reject\n";
    const int expected[] = {6, 7, 8};
    auto r = ik::ParseFiltrationVerdicts(text, expected);
    REQUIRE(r.verdicts.size() == 3);
    CHECK(r.verdicts[0].index == 6);
    CHECK(r.verdicts[0].decision == ik::Decision::kAccept);
    CHECK(r.verdicts[1].decision == ik::Decision::kReject);
    CHECK(r.verdicts[1].reason == "factual.");
    CHECK(r.verdicts[2].reason == "no reason given");
    CHECK(r.diagnostics.missing_indices.empty());
    CHECK(r.diagnostics.Consistent());
  }

  TEST_CASE("filtration verdict recovery") {
    std::string text =
        "1. Instruction: A.\nEvaluation: Accept\n###\n"
        "Instruction: B.\nEvaluation: Maybe\n###\n"
        "Instruction: C.\n###\n"
        "9. Instruction: D.\nEvaluation: Reject\nReason: no.\n###\n"
        "Evaluation: Accept\n";
    const int expected[] = {6, 7};
    auto r = ik::ParseFiltrationVerdicts(text, expected);
    REQUIRE(r.verdicts.size() == 2);
    CHECK(r.verdicts[0].index == 6);
    CHECK(r.verdicts[1].index == 7);
    CHECK(r.verdicts[1].decision == ik::Decision::kReject);
    CHECK(r.diagnostics.dropped.size() == 3);
    CHECK(r.diagnostics.Consistent());
    auto none = ik::ParseFiltrationVerdicts("nothing useful", expected);
    CHECK(none.verdicts.empty());
    CHECK(none.diagnostics.missing_indices == std::vector<int>{6, 7});
  }

  TEST_CASE("split output and explanation") {
    auto a = ik::SplitOutputExplanation(" The mouse was chased. ### Explanation: Passive. ");
    CHECK(a.output == "The mouse was chased.");
    CHECK(a.explanation == "Passive.");
    auto b = ik::SplitOutputExplanation("Only output");
    CHECK(b.output == "Only output");
    CHECK(b.explanation.empty());
    auto c = ik::SplitOutputExplanation("x ### y ### z");
    CHECK(c.output == "x");
    CHECK(c.explanation == "y ### z");
  }

  TEST_CASE("sft rendering splits back") {
    auto t = ik::MakeGeneratedTuple("g", 1, "Say hi.", "<noinput>", "Hi there.",
                                    "A greeting.", ik::LengthClass::kShort);
    std::string sft = ik::RenderSftExample(t);
    std::string tail = sft.substr(sft.find("### Output: ") + 12);
    auto s = ik::SplitOutputExplanation(tail);
    CHECK(s.output == t.output);
    CHECK(s.explanation == t.explanation);
  }
}
