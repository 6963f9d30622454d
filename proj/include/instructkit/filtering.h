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

#ifndef INSTRUCTKIT_FILTERING_H_
#define INSTRUCTKIT_FILTERING_H_

#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/corpus.h"
#include "instructkit/llmclient.h"
#include "instructkit/metrics.h"
#include "instructkit/tupleparse.h"

namespace instructkit {

enum class DiscriminatorPolicy { kFailClosed, kFailOpen };

struct FilterConfig {
  std::set<std::string> blocklist = {"video", "image", "graph", "flowchart"};
  double dedup_threshold = 0.75;
  DiscriminatorPolicy discriminator_policy = DiscriminatorPolicy::kFailClosed;
  int discriminator_batch_size = 5;
  std::string discriminator_model;
  double discriminator_temperature = 0.0;
  int discriminator_max_tokens = 2048;

  // Throws ConfigError.
  void Validate() const;
};

struct FilterDecision {
  std::string tuple_id;
  FilterStage stage = FilterStage::kBlocklist;
  bool accepted = true;
  std::string reason;
  std::optional<double> score;  // max ROUGE-L, dedup stage only
  std::string nearest_id;       // dedup rejections only

  bool operator==(const FilterDecision&) const = default;
};

// {tuple_id, stage, accepted, reason, score}
std::string DecisionToJsonLine(const FilterDecision& d);

// Tokenized instructions of admitted tuples, in admission order. Every pair
// in the pool scores at most the threshold it was built with.
class DedupPool {
 public:
  struct Entry {
    std::string id;
    TokenSequence tokens;
  };

  // Adds without checking; used to rebuild a pool from a persisted corpus
  // whose members were already admitted.
  void AddUnchecked(std::string id, TokenSequence tokens);
  // Admission is linearized by an internal lock.
  FilterDecision Admit(const InstructionTuple& t, double threshold);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

 private:
  std::mutex mu_;
  std::vector<Entry> entries_;
};

// Rejects when a blocklist term occurs as whole tokens in the instruction or
// the input.
FilterDecision BlocklistFilter(const InstructionTuple& t,
                               const FilterConfig& cfg);

struct DiscriminatorOutcome {
  // The client failed after its retries; `decisions` is empty and the batch
  // must be re-queued.
  bool deferred = false;
  std::string error;
  std::vector<FilterDecision> decisions;  // one per tuple, batch order
  ParseDiagnostics diagnostics;
};

DiscriminatorOutcome DiscriminatorFilter(std::span<const InstructionTuple> batch,
                                         ChatClient& client,
                                         const FilterConfig& cfg,
                                         std::string_view request_tag = "");

FilterDecision DedupAdmit(const InstructionTuple& t, DedupPool& pool,
                          const FilterConfig& cfg);

struct FilterRun {
  std::vector<InstructionTuple> accepted;  // input order
  // One terminal decision per input tuple, input order.
  std::vector<FilterDecision> decisions;
};

// Blocklist, then discriminator (batches in parallel), then dedup admission
// in input order. If any discriminator batch is deferred, throws ClientError
// before the pool is touched.
FilterRun RunFilters(std::span<const InstructionTuple> batch, DedupPool& pool,
                     ChatClient& client, const FilterConfig& cfg,
                     std::string_view request_tag = "");

}  // namespace instructkit

#endif  // INSTRUCTKIT_FILTERING_H_
