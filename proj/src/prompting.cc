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

#include "instructkit/prompting.h"

#include "instructkit/error.h"
#include "templates_embedded.h"

namespace instructkit {

PromptContext PromptContext::Make(std::vector<InstructionTuple> examples,
                                  int requested_count) {
  PromptContext ctx;
  ctx.next_index = static_cast<int>(examples.size()) + 1;
  ctx.examples = std::move(examples);
  ctx.requested_count = requested_count;
  return ctx;
}

std::string_view TemplateText(std::string_view name) {
  std::string_view text = internal::FindEmbeddedTemplate(name);
  if (text.data() == nullptr) {
    throw NotFoundError("no template named '" + std::string(name) + "'");
  }
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  return text;
}

std::string Substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  size_t pos = 0;
  while (pos < tmpl.size()) {
    size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    size_t close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) break;
    std::string name(tmpl.substr(open + 1, close - open - 1));
    auto it = values.find(name);
    if (it == values.end()) {
      out.append(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    out.append(tmpl.substr(pos, open - pos));
    out.append(it->second);
    pos = close + 1;
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string RenderExampleBlock(const InstructionTuple& t, int number) {
  return Substitute(TemplateText("generation_example"),
                    {{"n", std::to_string(number)},
                     {"instruction", t.instruction},
                     {"input", t.input},
                     {"output", t.output},
                     {"explanation", t.explanation}});
}

std::string RenderExampleBlocks(std::span<const InstructionTuple> tuples,
                                int first_number) {
  std::string out;
  for (size_t i = 0; i < tuples.size(); ++i) {
    if (i > 0) out += "\n###\n";
    out += RenderExampleBlock(tuples[i], first_number + static_cast<int>(i));
  }
  return out;
}

RenderedPrompt RenderGenerationPrompt(const PromptContext& ctx) {
  if (ctx.examples.empty()) {
    throw ValidationError("generation prompt needs at least one example");
  }
  if (ctx.requested_count < 1) {
    throw ValidationError("requested_count must be positive");
  }
  if (ctx.next_index != static_cast<int>(ctx.examples.size()) + 1) {
    throw ValidationError("next_index must equal the example count plus one");
  }
  RenderedPrompt p;
  p.kind = PromptKind::kGeneration;
  p.text = Substitute(TemplateText("generation"),
                      {{"count", std::to_string(ctx.requested_count)},
                       {"examples", RenderExampleBlocks(ctx.examples, 1)},
                       {"next_index", std::to_string(ctx.next_index)}});
  for (const auto& t : ctx.examples) p.source_ids.push_back(t.id);
  return p;
}

RenderedPrompt RenderFiltrationPrompt(
    std::span<const InstructionTuple> candidates) {
  if (candidates.empty()) {
    throw ValidationError("filtration prompt needs at least one candidate");
  }
  std::string_view block = TemplateText("filtration_candidate");
  std::string rendered;
  RenderedPrompt p;
  p.kind = PromptKind::kFiltration;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto& t = candidates[i];
    if (i > 0) rendered += "\n###\n";
    rendered += Substitute(
        block, {{"n", std::to_string(kFiltrationExampleCount + 1 + i)},
                {"instruction", t.instruction},
                {"input", t.input},
                {"output", t.output}});
    p.source_ids.push_back(t.id);
  }
  p.text = Substitute(TemplateText("filtration"), {{"candidates", rendered}});
  return p;
}

std::string RenderSftExample(const InstructionTuple& t) {
  auto v = ValidateTuple(t);
  if (!v.empty()) {
    throw ValidationError("cannot render tuple '" + t.id + "': " + Join(v, "; "));
  }
  return Substitute(TemplateText("sft"), {{"instruction", t.instruction},
                                          {"input", t.input},
                                          {"output", t.output},
                                          {"explanation", t.explanation}});
}

std::string RenderInferencePrompt(std::string_view instruction,
                                  std::string_view input) {
  if (Trim(instruction).empty()) {
    throw ValidationError("inference prompt needs a nonempty instruction");
  }
  return Substitute(TemplateText("inference"),
                    {{"instruction", std::string(Trim(instruction))},
                     {"input", CanonicalizeInput(input)}});
}

}  // namespace instructkit
