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

#ifndef INSTRUCTKIT_PIPELINE_H_
#define INSTRUCTKIT_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "instructkit/config.h"
#include "instructkit/corpus.h"
#include "instructkit/filtering.h"
#include "instructkit/llmclient.h"
#include "instructkit/prompting.h"
#include "instructkit/random.h"
#include "instructkit/util.h"

namespace instructkit {

struct ClientSettings {
  std::string endpoint_url;
  std::string model_name;
  int max_in_flight = 4;
  RetryPolicy retry;
  double generation_temperature = 1.0;
  int generation_max_tokens = 2048;
};

struct RunConfig {
  int target_count = 70000;
  int examples_per_prompt = 4;
  int requested_count = kDefaultRequestedCount;
  uint64_t rng_seed = 0;
  // Rounds are numbered from 1; the run stops after round max_rounds.
  int max_rounds = 100000;
  std::vector<size_t> partition_sizes = {17000, 50000, 70000};
  size_t long_min_words = 30;
  // Stamped on generated tuples instead of the wall clock when set.
  std::optional<Timestamp> created_at;
  FilterConfig filter;
  ClientSettings client;
  std::filesystem::path seeds_path;
  std::filesystem::path output_dir;

  // Throws ConfigError.
  void Validate() const;
  // Hash over every setting that changes the produced data. Output paths,
  // max_rounds and endpoint/retry settings are excluded; the seed file is
  // hashed by content.
  std::string Fingerprint() const;

  static RunConfig FromKeyValue(const KeyValueConfig& kv);
  static RunConfig Load(const std::filesystem::path& path);
};

// File layout under RunConfig::output_dir.
struct RunPaths {
  explicit RunPaths(const std::filesystem::path& dir);
  std::filesystem::path dir;
  std::filesystem::path corpus;     // corpus.jsonl
  std::filesystem::path manifest;   // manifest.json
  std::filesystem::path decisions;  // decisions.jsonl
  std::filesystem::path rounds;     // rounds.jsonl
  std::filesystem::path Partition(size_t size) const;
};

struct GenerationRound {
  int round = 0;
  std::vector<std::string> sampled_ids;
  std::string raw_completion;
  std::string finish_reason;
  size_t parsed_count = 0;
  size_t accepted_count = 0;
  size_t dropped_blocks = 0;

  std::string ToJsonLine() const;
  static GenerationRound FromJsonLine(std::string_view line);
};

// Three seed slots in a 2:1 short/long mix (majority class chosen
// uniformly), one generated tuple from the pool or a further distinct seed
// when the pool is empty, then shuffled. For examples_per_prompt = n the seed
// slots number n - 1 with ceil/floor halves.
PromptContext SamplePromptContext(const SeedCorpus& seeds,
                                  std::span<const InstructionTuple> pool,
                                  Rng& rng, int examples_per_prompt = 4,
                                  int requested_count = kDefaultRequestedCount);

struct BootstrapOptions {
  // Overrides RunConfig::max_rounds when set.
  std::optional<int> max_rounds;
  LogSink log = StderrLog();
};

// Resumes from output_dir when a manifest exists (the fingerprint must
// match). Rounds are persisted one at a time: corpus, decisions, round log,
// then manifest. On an unrecoverable client failure the manifest of the last
// complete round is on disk and the ClientError is rethrown.
DatasetManifest RunBootstrap(const RunConfig& cfg, ChatClient& client,
                             const BootstrapOptions& options = {});

// Uniform random subsets, corpus order preserved, one file per size.
std::vector<std::filesystem::path> MakePartitions(
    const std::filesystem::path& corpus_path, std::span<const size_t> sizes,
    uint64_t rng_seed, const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> MakePartitions(
    std::span<const InstructionTuple> corpus, std::span<const size_t> sizes,
    uint64_t rng_seed, const std::filesystem::path& out_dir);

// JSONL, one {"text_instructions": ...} object per tuple.
size_t RenderSftDataset(const std::filesystem::path& corpus_path,
                        const std::filesystem::path& out_path);
// JSONL, one {"id": ..., "prompt": ...} object per tuple.
size_t RenderInferenceDataset(const std::filesystem::path& tuples_path,
                              const std::filesystem::path& out_path);

}  // namespace instructkit

#endif  // INSTRUCTKIT_PIPELINE_H_
