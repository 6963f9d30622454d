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

#ifndef INSTRUCTKIT_PROMPTING_H_
#define INSTRUCTKIT_PROMPTING_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/corpus.h"

namespace instructkit {

// Renderers for the four prompt/training templates. Template text lives in
// templates/*.txt and is compiled into the library; see README for the
// placeholder syntax.

enum class PromptKind { kGeneration, kFiltration, kSft, kInference };

// Number of worked examples baked into the filtration template.
inline constexpr int kFiltrationExampleCount = 5;
inline constexpr int kDefaultRequestedCount = 10;

struct PromptContext {
  std::vector<InstructionTuple> examples;
  int requested_count = kDefaultRequestedCount;
  int next_index = 1;

  // next_index is derived as examples.size() + 1.
  static PromptContext Make(std::vector<InstructionTuple> examples,
                            int requested_count = kDefaultRequestedCount);
};

struct RenderedPrompt {
  std::string text;
  PromptKind kind;
  std::vector<std::string> source_ids;
};

// Raw template by file stem ("generation", "sft", ...), with the file's
// final newline removed. Throws NotFoundError for unknown names.
std::string_view TemplateText(std::string_view name);

// Replaces each "{name}" whose name is a key of `values`. Other braces are
// left untouched and substituted text is never rescanned.
std::string Substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& values);

// "N. Instruction: ...\nN. Input: ...\nN. Output: ...\nN. Explanation: ..."
std::string RenderExampleBlock(const InstructionTuple& t, int number);
// Blocks numbered from `first_number`, joined by "\n###\n".
std::string RenderExampleBlocks(std::span<const InstructionTuple> tuples,
                                int first_number);

RenderedPrompt RenderGenerationPrompt(const PromptContext& ctx);
// Candidates are numbered after the template's worked examples.
RenderedPrompt RenderFiltrationPrompt(
    std::span<const InstructionTuple> candidates);
std::string RenderSftExample(const InstructionTuple& t);
// Empty or sentinel-like input renders as "<noinput>".
std::string RenderInferencePrompt(std::string_view instruction,
                                  std::string_view input);

}  // namespace instructkit

#endif  // INSTRUCTKIT_PROMPTING_H_
