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

#include "instructkit/filtering.h"

#include <future>
#include <map>

#include "instructkit/error.h"
#include "instructkit/prompting.h"
#include "json.hpp"

namespace instructkit {

namespace {

bool ContainsRun(const std::vector<std::string>& haystack,
                 const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool match = true;
    for (size_t j = 0; j < needle.size() && match; ++j) {
      match = haystack[i + j] == needle[j];
    }
    if (match) return true;
  }
  return false;
}

}  // namespace

void FilterConfig::Validate() const {
  if (!(dedup_threshold >= 0.0 && dedup_threshold <= 1.0)) {
    throw ConfigError("dedup_threshold must be in [0, 1]");
  }
  for (const auto& term : blocklist) {
    if (Tokenize(term).empty()) {
      throw ConfigError("blocklist terms must be nonempty words");
    }
  }
  if (discriminator_batch_size < 1) {
    throw ConfigError("discriminator batch size must be positive");
  }
}

std::string DecisionToJsonLine(const FilterDecision& d) {
  nlohmann::ordered_json j;
  j["tuple_id"] = d.tuple_id;
  j["stage"] = FilterStageName(d.stage);
  j["accepted"] = d.accepted;
  j["reason"] = d.reason;
  if (d.score) {
    j["score"] = *d.score;
  } else {
    j["score"] = nullptr;
  }
  if (!d.nearest_id.empty()) j["nearest_id"] = d.nearest_id;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void DedupPool::AddUnchecked(std::string id, TokenSequence tokens) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_.push_back({std::move(id), std::move(tokens)});
}

FilterDecision DedupPool::Admit(const InstructionTuple& t, double threshold) {
  TokenSequence tokens = Tokenize(t.instruction);
  std::lock_guard<std::mutex> lock(mu_);
  FilterDecision d;
  d.tuple_id = t.id;
  d.stage = FilterStage::kDedup;
  double best = 0.0;
  const Entry* nearest = nullptr;
  for (const auto& e : entries_) {
    double s = RougeLF1(tokens, e.tokens);
    if (nearest == nullptr || s > best) {
      best = s;
      nearest = &e;
    }
  }
  d.score = best;
  if (best <= threshold) {
    d.accepted = true;
    entries_.push_back({t.id, std::move(tokens)});
  } else {
    d.accepted = false;
    d.nearest_id = nearest->id;
    d.reason = "too similar to " + nearest->id;
  }
  return d;
}

FilterDecision BlocklistFilter(const InstructionTuple& t,
                               const FilterConfig& cfg) {
  FilterDecision d;
  d.tuple_id = t.id;
  d.stage = FilterStage::kBlocklist;
  const TokenSequence instruction = Tokenize(t.instruction);
  const TokenSequence input = Tokenize(t.input);
  for (const auto& term : cfg.blocklist) {
    const TokenSequence needle = Tokenize(term);
    if (ContainsRun(instruction.tokens, needle.tokens) ||
        ContainsRun(input.tokens, needle.tokens)) {
      d.accepted = false;
      d.reason = Join(needle.tokens, " ");
      return d;
    }
  }
  return d;
}

DiscriminatorOutcome DiscriminatorFilter(std::span<const InstructionTuple> batch,
                                         ChatClient& client,
                                         const FilterConfig& cfg,
                                         std::string_view request_tag) {
  if (batch.empty()) throw ValidationError("discriminator batch is empty");
  RenderedPrompt prompt = RenderFiltrationPrompt(batch);
  ChatRequest req;
  req.model = cfg.discriminator_model;
  req.prompt = std::move(prompt.text);
  req.temperature = cfg.discriminator_temperature;
  req.max_tokens = cfg.discriminator_max_tokens;
  req.request_tag = std::string(request_tag);

  DiscriminatorOutcome outcome;
  ChatResponse resp;
  try {
    resp = client.Complete(req);
  } catch (const ClientError& e) {
    outcome.deferred = true;
    outcome.error = e.what();
    return outcome;
  }

  std::vector<int> expected;
  for (size_t i = 0; i < batch.size(); ++i) {
    expected.push_back(kFiltrationExampleCount + 1 + static_cast<int>(i));
  }
  ParsedVerdicts parsed = ParseFiltrationVerdicts(resp.text, expected);
  std::map<int, const Verdict*> by_index;
  for (const auto& v : parsed.verdicts) by_index[v.index] = &v;

  for (size_t i = 0; i < batch.size(); ++i) {
    FilterDecision d;
    d.tuple_id = batch[i].id;
    d.stage = FilterStage::kDiscriminator;
    auto it = by_index.find(expected[i]);
    if (it == by_index.end()) {
      d.accepted = cfg.discriminator_policy == DiscriminatorPolicy::kFailOpen;
      d.reason = d.accepted ? "no verdict (fail-open)" : "no verdict";
    } else {
      d.accepted = it->second->decision == Decision::kAccept;
      d.reason = it->second->reason;
    }
    outcome.decisions.push_back(std::move(d));
  }
  outcome.diagnostics = std::move(parsed.diagnostics);
  return outcome;
}

FilterDecision DedupAdmit(const InstructionTuple& t, DedupPool& pool,
                          const FilterConfig& cfg) {
  return pool.Admit(t, cfg.dedup_threshold);
}

FilterRun RunFilters(std::span<const InstructionTuple> batch, DedupPool& pool,
                     ChatClient& client, const FilterConfig& cfg,
                     std::string_view request_tag) {
  cfg.Validate();
  std::vector<std::optional<FilterDecision>> terminal(batch.size());
  std::vector<size_t> survivors;
  for (size_t i = 0; i < batch.size(); ++i) {
    FilterDecision d = BlocklistFilter(batch[i], cfg);
    if (!d.accepted) {
      terminal[i] = std::move(d);
    } else {
      survivors.push_back(i);
    }
  }

  // Discriminator batches run concurrently; the client enforces its own
  // in-flight cap.
  const size_t chunk = static_cast<size_t>(cfg.discriminator_batch_size);
  std::vector<std::vector<size_t>> chunks;
  for (size_t s = 0; s < survivors.size(); s += chunk) {
    chunks.emplace_back(survivors.begin() + s,
                        survivors.begin() + std::min(s + chunk, survivors.size()));
  }
  std::vector<std::future<DiscriminatorOutcome>> futures;
  for (size_t c = 0; c < chunks.size(); ++c) {
    futures.push_back(std::async(std::launch::async, [&, c]() {
      std::vector<InstructionTuple> members;
      for (size_t i : chunks[c]) members.push_back(batch[i]);
      return DiscriminatorFilter(members, client, cfg,
                                 std::string(request_tag) + "/disc-" +
                                     std::to_string(c + 1));
    }));
  }
  std::vector<DiscriminatorOutcome> outcomes;
  for (auto& f : futures) outcomes.push_back(f.get());
  for (const auto& o : outcomes) {
    if (o.deferred) throw ClientError("discriminator deferred: " + o.error, 0);
  }

  std::vector<bool> passed(batch.size(), false);
  for (size_t c = 0; c < chunks.size(); ++c) {
    for (size_t k = 0; k < chunks[c].size(); ++k) {
      const size_t i = chunks[c][k];
      const FilterDecision& d = outcomes[c].decisions[k];
      if (d.accepted) {
        passed[i] = true;
      } else {
        terminal[i] = d;
      }
    }
  }

  FilterRun run;
  for (size_t i = 0; i < batch.size(); ++i) {
    if (passed[i]) {
      FilterDecision d = DedupAdmit(batch[i], pool, cfg);
      if (d.accepted) run.accepted.push_back(batch[i]);
      terminal[i] = std::move(d);
    }
    run.decisions.push_back(std::move(*terminal[i]));
  }
  return run;
}

}  // namespace instructkit
