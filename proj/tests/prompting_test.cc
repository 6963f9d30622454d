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
#include "instructkit/corpus.h"
#include "instructkit/error.h"
#include "instructkit/prompting.h"
#include "instructkit/util.h"

namespace ik = instructkit;

namespace {

std::vector<ik::InstructionTuple> WorkedExamples() {
  return ik::LoadTuples(std::string(TEST_DATA_DIR) + "/worked_examples.jsonl");
}

std::string Golden(const char* name) {
  return ik::ReadFile(std::string(TEST_DATA_DIR) + "/" + name);
}

}  // namespace

TEST_SUITE("prompting") {
  TEST_CASE("substitution is single pass") {
    CHECK(ik::Substitute("{a} and {b}", {{"a", "{b}"}, {"b", "x"}}) == "{b} and x");
    CHECK(ik::Substitute("{unknown} {a}", {{"a", "1"}}) == "{unknown} 1");
    CHECK(ik::Substitute("{a}{a}", {{"a", "z"}}) == "zz");
    CHECK(ik::Substitute("{ {a", {{"a", "z"}}) == "{ {a");
  }

  TEST_CASE("templates are embedded") {
    for (const char* name : {"generation", "generation_example", "filtration",
                             "filtration_candidate", "sft", "inference"}) {
      CHECK_FALSE(ik::TemplateText(name).empty());
    }
    CHECK_THROWS_AS(ik::TemplateText("nope"), ik::NotFoundError);
  }

  TEST_CASE("sft golden") {
    auto t = WorkedExamples();
    CHECK(ik::RenderSftExample(t[2]) == Golden("golden_sft.txt"));
    CHECK(ik::RenderSftExample(t[2]).rfind("Below is an instruction", 0) == 0);
  }

  TEST_CASE("inference golden") {
    auto t = WorkedExamples();
    CHECK(ik::RenderInferencePrompt(t[2].instruction, t[2].input) ==
          Golden("golden_inference.txt"));
    std::string empty_input = ik::RenderInferencePrompt("Say hi.", "");
    CHECK(empty_input.find("### Input: <noinput> ### Output: ") != std::string::npos);
    CHECK_THROWS_AS(ik::RenderInferencePrompt("  ", "x"), ik::ValidationError);
  }

  TEST_CASE("generation golden with fifteen requested") {
    auto ctx = ik::PromptContext::Make(WorkedExamples(), 15);
    CHECK(ctx.next_index == 5);
    auto p = ik::RenderGenerationPrompt(ctx);
    CHECK(p.text == Golden("golden_generation.txt"));
    CHECK(p.text.find("come up with a set of 15 task instructions") !=
          std::string::npos);
    CHECK(p.text.find("List of 15 tasks:") != std::string::npos);
    CHECK(p.source_ids.size() == 4);
    CHECK(p.kind == ik::PromptKind::kGeneration);
  }

  TEST_CASE("generation errors") {
    CHECK_THROWS_AS(ik::RenderGenerationPrompt(ik::PromptContext::Make({}, 10)),
                    ik::ValidationError);
    CHECK_THROWS_AS(ik::RenderGenerationPrompt(ik::PromptContext::Make(WorkedExamples(), 0)),
                    ik::ValidationError);
    auto ctx = ik::PromptContext::Make(WorkedExamples(), 10);
    ctx.next_index = 9;
    CHECK_THROWS_AS(ik::RenderGenerationPrompt(ctx), ik::ValidationError);
  }

  TEST_CASE("filtration golden numbers candidates after examples") {
    auto t = WorkedExamples();
    std::vector<ik::InstructionTuple> candidates = {t[2], t[3]};
    auto p = ik::RenderFiltrationPrompt(candidates);
    CHECK(p.text == Golden("golden_filtration.txt"));
    CHECK(p.text.find("\n6. Instruction: Reply to the following email") !=
          std::string::npos);
    CHECK(p.text.find("\n7. Instruction: Read the email.") != std::string::npos);
    CHECK(p.text.find("accept or reject them based on") != std::string::npos);
    CHECK_THROWS_AS(ik::RenderFiltrationPrompt({}), ik::ValidationError);
  }

  TEST_CASE("placeholder text in data is not expanded") {
    auto t = WorkedExamples()[0];
    t.instruction = "Use {count} and {examples} literally.";
    auto ctx = ik::PromptContext::Make({t}, 3);
    auto p = ik::RenderGenerationPrompt(ctx);
    CHECK(p.text.find("1. Instruction: Use {count} and {examples} literally.") !=
          std::string::npos);
  }

  TEST_CASE("example block layout") {
    auto t = WorkedExamples()[0];
    std::string block = ik::RenderExampleBlock(t, 3);
    CHECK(block.rfind("3. Instruction: Write an indirect response", 0) == 0);
    CHECK(block.find("\n3. Input: who is your favorite tennis player?\n") !=
          std::string::npos);
    CHECK(block.find("\n3. Explanation: ") != std::string::npos);
    auto all = WorkedExamples();
    CHECK(ik::RenderExampleBlocks(all, 1).find("\n###\n2. Instruction:") !=
          std::string::npos);
  }
}
