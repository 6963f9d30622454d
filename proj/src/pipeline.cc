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

#include "instructkit/pipeline.h"

#include <algorithm>
#include <future>
#include "json.hpp"
#include <set>

#include "instructkit/error.h"
#include "instructkit/metrics.h"
#include "instructkit/tupleparse.h"

namespace instructkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr uint64_t kPartitionStream = 0x706172746974ULL;

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "target_count",
      "examples_per_prompt",
      "requested_count",
      "rng_seed",
      "max_rounds",
      "partition_sizes",
      "long_min_words",
      "created_at",
      "seeds_path",
      "output_dir",
      "endpoint_url",
      "model_name",
      "max_in_flight",
      "max_tokens",
      "generation_temperature",
      "retry.max_attempts",
      "retry.base_backoff_ms",
      "filter.blocklist",
      "filter.dedup_threshold",
      "filter.discriminator_policy",
      "filter.discriminator_batch_size",
      "filter.discriminator_model",
      "filter.discriminator_temperature",
      "filter.discriminator_max_tokens",
  };
  return keys;
}

fs::path Resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) return base / p;
  return p;
}

int ToInt(long long v, const char* key) {
  if (v < INT32_MIN || v > INT32_MAX) {
    throw ConfigError(std::string(key) + " out of range");
  }
  return static_cast<int>(v);
}

// Keeps lines whose "round" is at most `max_round`. A torn or unparsable
// trailing line is dropped as well. Rewrites the file only if it changed.
void TruncateByRound(const fs::path& path, int max_round) {
  if (!fs::exists(path)) return;
  const std::string text = ReadFile(path);
  std::string kept;
  bool changed = false;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      changed = true;  // torn final line
      break;
    }
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("round") ||
        !j["round"].is_number_integer()) {
      throw ValidationError(path.string() + ": malformed line");
    }
    if (j["round"].get<int>() > max_round) {
      changed = true;
      continue;
    }
    kept.append(line);
    kept.push_back('\n');
  }
  if (changed) WriteFileAtomic(path, kept);
}

std::string RoundDecisionLine(int round, const FilterDecision& d) {
  ordered_json j;
  j["round"] = round;
  const ordered_json fields = ordered_json::parse(DecisionToJsonLine(d));
  for (const auto& [k, v] : fields.items()) j[k] = v;
  return j.dump();
}

std::vector<InstructionTuple> Pick(const SeedCorpus& seeds,
                                   const std::vector<size_t>& candidates,
                                   size_t k, Rng& rng,
                                   std::set<size_t>& taken) {
  std::vector<InstructionTuple> out;
  for (size_t i : rng.SampleIndices(candidates.size(), k)) {
    taken.insert(candidates[i]);
    out.push_back(seeds.tuples()[candidates[i]]);
  }
  return out;
}

}  // namespace

void RunConfig::Validate() const {
  if (target_count < 1) throw ConfigError("target_count must be positive");
  if (examples_per_prompt < 1) {
    throw ConfigError("examples_per_prompt must be positive");
  }
  if (requested_count < 1) throw ConfigError("requested_count must be positive");
  if (max_rounds < 0) throw ConfigError("max_rounds must not be negative");
  if (long_min_words < 1) throw ConfigError("long_min_words must be positive");
  size_t prev = 0;
  for (size_t s : partition_sizes) {
    if (s == 0) throw ConfigError("partition sizes must be positive");
    if (s < prev) throw ConfigError("partition sizes must be nondecreasing");
    if (s > static_cast<size_t>(target_count)) {
      throw ConfigError("partition size " + std::to_string(s) +
                        " exceeds target_count");
    }
    prev = s;
  }
  if (seeds_path.empty()) throw ConfigError("seeds_path is required");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (client.max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
  if (client.generation_max_tokens < 1) {
    throw ConfigError("max_tokens must be positive");
  }
  filter.Validate();
}

std::string RunConfig::Fingerprint() const {
  ordered_json j;
  j["target_count"] = target_count;
  j["examples_per_prompt"] = examples_per_prompt;
  j["requested_count"] = requested_count;
  j["rng_seed"] = rng_seed;
  j["partition_sizes"] = partition_sizes;
  j["long_min_words"] = long_min_words;
  j["created_at"] = created_at ? FormatRfc3339(*created_at) : "";
  j["model_name"] = client.model_name;
  j["max_in_flight"] = client.max_in_flight;
  j["generation_temperature"] = client.generation_temperature;
  j["max_tokens"] = client.generation_max_tokens;
  j["filter.blocklist"] = filter.blocklist;
  j["filter.dedup_threshold"] = filter.dedup_threshold;
  j["filter.discriminator_policy"] =
      filter.discriminator_policy == DiscriminatorPolicy::kFailClosed ? "fail_closed"
                                                        : "fail_open";
  j["filter.discriminator_batch_size"] = filter.discriminator_batch_size;
  j["filter.discriminator_model"] = filter.discriminator_model;
  j["filter.discriminator_temperature"] = filter.discriminator_temperature;
  j["filter.discriminator_max_tokens"] = filter.discriminator_max_tokens;
  // Parsed seeds, so formatting-only edits to the file do not count.
  std::string seeds;
  const SeedCorpus corpus = SeedCorpus::Load(seeds_path);
  for (const auto& t : corpus.tuples()) {
    seeds += TupleToJsonLine(t);
    seeds += '\n';
  }
  j["seeds_sha256"] = Sha256Hex(seeds);
  return Sha256Hex(j.dump());
}

RunConfig RunConfig::FromKeyValue(const KeyValueConfig& kv) {
  kv.RejectUnknown(KnownKeys());
  RunConfig cfg;
  cfg.target_count = ToInt(kv.GetInt("target_count", cfg.target_count),
                           "target_count");
  cfg.examples_per_prompt = ToInt(
      kv.GetInt("examples_per_prompt", cfg.examples_per_prompt),
      "examples_per_prompt");
  cfg.requested_count = ToInt(
      kv.GetInt("requested_count", cfg.requested_count), "requested_count");
  long long seed = kv.GetInt("rng_seed", 0);
  if (seed < 0) throw ConfigError("rng_seed must not be negative");
  cfg.rng_seed = static_cast<uint64_t>(seed);
  cfg.max_rounds = ToInt(kv.GetInt("max_rounds", cfg.max_rounds), "max_rounds");
  if (kv.Has("partition_sizes")) {
    cfg.partition_sizes.clear();
    for (const auto& s : kv.GetList("partition_sizes", {})) {
      KeyValueConfig one;
      one.Set("partition_sizes", s);
      long long n = one.GetInt("partition_sizes", 0);
      if (n <= 0) throw ConfigError("partition sizes must be positive");
      cfg.partition_sizes.push_back(static_cast<size_t>(n));
    }
  }
  long long lw = kv.GetInt("long_min_words", 30);
  if (lw < 1) throw ConfigError("long_min_words must be positive");
  cfg.long_min_words = static_cast<size_t>(lw);
  if (auto v = kv.Get("created_at")) {
    try {
      cfg.created_at = ParseRfc3339(*v);
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("created_at: ") + e.what());
    }
  }
  if (auto v = kv.Get("seeds_path")) cfg.seeds_path = Resolve(kv.base_dir(), *v);
  if (auto v = kv.Get("output_dir")) cfg.output_dir = Resolve(kv.base_dir(), *v);

  cfg.client.endpoint_url = kv.GetString("endpoint_url", "");
  cfg.client.model_name = kv.GetString("model_name", "");
  cfg.client.max_in_flight = ToInt(
      kv.GetInt("max_in_flight", cfg.client.max_in_flight), "max_in_flight");
  cfg.client.generation_max_tokens = ToInt(
      kv.GetInt("max_tokens", cfg.client.generation_max_tokens), "max_tokens");
  cfg.client.generation_temperature =
      kv.GetDouble("generation_temperature", cfg.client.generation_temperature);
  cfg.client.retry.max_attempts = ToInt(
      kv.GetInt("retry.max_attempts", cfg.client.retry.max_attempts),
      "retry.max_attempts");
  cfg.client.retry.base_backoff_ms = ToInt(
      kv.GetInt("retry.base_backoff_ms", cfg.client.retry.base_backoff_ms),
      "retry.base_backoff_ms");

  if (kv.Has("filter.blocklist")) {
    cfg.filter.blocklist.clear();
    for (const auto& term : kv.GetList("filter.blocklist", {})) {
      cfg.filter.blocklist.insert(ToLowerAscii(term));
    }
  }
  cfg.filter.dedup_threshold =
      kv.GetDouble("filter.dedup_threshold", cfg.filter.dedup_threshold);
  std::string policy =
      kv.GetString("filter.discriminator_policy", "fail_closed");
  if (policy == "fail_closed") {
    cfg.filter.discriminator_policy = DiscriminatorPolicy::kFailClosed;
  } else if (policy == "fail_open") {
    cfg.filter.discriminator_policy = DiscriminatorPolicy::kFailOpen;
  } else {
    throw ConfigError("filter.discriminator_policy must be fail_closed or "
                      "fail_open, got '" + policy + "'");
  }
  cfg.filter.discriminator_batch_size = ToInt(
      kv.GetInt("filter.discriminator_batch_size",
                cfg.filter.discriminator_batch_size),
      "filter.discriminator_batch_size");
  cfg.filter.discriminator_model =
      kv.GetString("filter.discriminator_model", cfg.client.model_name);
  cfg.filter.discriminator_temperature = kv.GetDouble(
      "filter.discriminator_temperature", cfg.filter.discriminator_temperature);
  cfg.filter.discriminator_max_tokens = ToInt(
      kv.GetInt("filter.discriminator_max_tokens",
                cfg.filter.discriminator_max_tokens),
      "filter.discriminator_max_tokens");
  cfg.Validate();
  return cfg;
}

RunConfig RunConfig::Load(const fs::path& path) {
  return FromKeyValue(KeyValueConfig::Load(path));
}

RunPaths::RunPaths(const fs::path& d)
    : dir(d),
      corpus(d / "corpus.jsonl"),
      manifest(d / "manifest.json"),
      decisions(d / "decisions.jsonl"),
      rounds(d / "rounds.jsonl") {}

fs::path RunPaths::Partition(size_t size) const {
  return dir / ("partition-" + std::to_string(size) + ".jsonl");
}

std::string GenerationRound::ToJsonLine() const {
  ordered_json j;
  j["round"] = round;
  j["sampled_ids"] = sampled_ids;
  j["finish_reason"] = finish_reason;
  j["parsed_count"] = parsed_count;
  j["accepted_count"] = accepted_count;
  j["dropped_blocks"] = dropped_blocks;
  j["raw_completion"] = raw_completion;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

GenerationRound GenerationRound::FromJsonLine(std::string_view line) {
  ordered_json j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("round log line is not a JSON object");
  }
  GenerationRound r;
  try {
    r.round = j.at("round").get<int>();
    r.sampled_ids = j.at("sampled_ids").get<std::vector<std::string>>();
    r.finish_reason = j.at("finish_reason").get<std::string>();
    r.parsed_count = j.at("parsed_count").get<size_t>();
    r.accepted_count = j.at("accepted_count").get<size_t>();
    r.dropped_blocks = j.at("dropped_blocks").get<size_t>();
    r.raw_completion = j.at("raw_completion").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("round log line: ") + e.what());
  }
  if (r.accepted_count > r.parsed_count) {
    throw ValidationError("round log line: accepted exceeds parsed");
  }
  return r;
}

PromptContext SamplePromptContext(const SeedCorpus& seeds,
                                  std::span<const InstructionTuple> pool,
                                  Rng& rng, int examples_per_prompt,
                                  int requested_count) {
  if (examples_per_prompt < 1) {
    throw ValidationError("examples_per_prompt must be positive");
  }
  const size_t seed_slots = static_cast<size_t>(examples_per_prompt) - 1;
  const LengthClass majority =
      rng.UniformIndex(2) == 0 ? LengthClass::kShort : LengthClass::kLong;
  const LengthClass minority = majority == LengthClass::kShort
                                   ? LengthClass::kLong
                                   : LengthClass::kShort;
  const size_t n_major = (seed_slots + 1) / 2;
  const size_t n_minor = seed_slots / 2;
  const auto& major_idx = seeds.indices(majority);
  const auto& minor_idx = seeds.indices(minority);
  if (major_idx.size() < n_major || minor_idx.size() < n_minor) {
    throw ValidationError(
        "seed corpus lacks enough " +
        std::string(LengthClassName(major_idx.size() < n_major ? majority
                                                               : minority)) +
        " tuples for the sampling mix");
  }
  std::set<size_t> taken;
  std::vector<InstructionTuple> examples =
      Pick(seeds, major_idx, n_major, rng, taken);
  for (auto& t : Pick(seeds, minor_idx, n_minor, rng, taken)) {
    examples.push_back(std::move(t));
  }
  if (!pool.empty()) {
    examples.push_back(pool[rng.UniformIndex(pool.size())]);
  } else {
    std::vector<size_t> rest;
    for (size_t i = 0; i < seeds.size(); ++i) {
      if (!taken.count(i)) rest.push_back(i);
    }
    if (rest.empty()) {
      throw ValidationError("seed corpus too small to fill every example slot");
    }
    examples.push_back(seeds.tuples()[rest[rng.UniformIndex(rest.size())]]);
  }
  rng.Shuffle(examples);
  return PromptContext::Make(std::move(examples), requested_count);
}

DatasetManifest RunBootstrap(const RunConfig& cfg, ChatClient& client,
                             const BootstrapOptions& options) {
  cfg.Validate();
  const LogSink& log = options.log;
  SeedCorpus seeds = SeedCorpus::Load(cfg.seeds_path);
  RunPaths paths(cfg.output_dir);
  fs::create_directories(paths.dir);
  const std::string fingerprint = cfg.Fingerprint();

  DatasetManifest manifest;
  if (fs::exists(paths.manifest)) {
    manifest = DatasetManifest::FromJson(ReadFile(paths.manifest));
    if (manifest.config_fingerprint != fingerprint) {
      throw ConfigError(paths.dir.string() +
                        " holds a run with a different configuration");
    }
    if (log) {
      log("resume rounds_completed=" +
          std::to_string(manifest.rounds_completed));
    }
  } else {
    manifest.config_fingerprint = fingerprint;
    manifest.rng_seed = cfg.rng_seed;
  }

  // Anything past the last flushed manifest belongs to an interrupted round.
  for (const auto& p : {paths.corpus, paths.decisions, paths.rounds}) {
    TruncateByRound(p, manifest.rounds_completed);
  }
  std::vector<InstructionTuple> corpus;
  if (fs::exists(paths.corpus)) {
    corpus = ParseTuplesJsonl(ReadFile(paths.corpus), paths.corpus.string());
  }
  if (corpus.size() != manifest.total_accepted) {
    throw ValidationError(paths.corpus.string() + " holds " +
                          std::to_string(corpus.size()) +
                          " tuples but the manifest records " +
                          std::to_string(manifest.total_accepted));
  }

  DedupPool pool;
  for (const auto& t : seeds.tuples()) pool.AddUnchecked(t.id, Tokenize(t.instruction));
  for (const auto& t : corpus) pool.AddUnchecked(t.id, Tokenize(t.instruction));

  const int budget = options.max_rounds.value_or(cfg.max_rounds);
  const int window = cfg.client.max_in_flight;
  const uint64_t target = static_cast<uint64_t>(cfg.target_count);
  manifest.target_reached = manifest.total_accepted >= target;
  int next = manifest.rounds_completed + 1;

  while (!manifest.target_reached && next <= budget) {
    // Rounds of one window sample from the same snapshot so results do not
    // depend on completion order or on where a previous run stopped.
    const int window_start = ((next - 1) / window) * window + 1;
    const int window_end = std::min(window_start + window - 1, budget);
    size_t snapshot = 0;
    while (snapshot < corpus.size() && corpus[snapshot].round < window_start) {
      ++snapshot;
    }
    std::span<const InstructionTuple> pool_view(corpus.data(), snapshot);

    struct Pending {
      int round;
      RenderedPrompt prompt;
      std::future<ChatResponse> response;
    };
    std::vector<Pending> pending;
    for (int r = next; r <= window_end; ++r) {
      Rng rng = Rng::Derive(cfg.rng_seed, {static_cast<uint64_t>(r)});
      PromptContext ctx = SamplePromptContext(
          seeds, pool_view, rng, cfg.examples_per_prompt, cfg.requested_count);
      RenderedPrompt prompt = RenderGenerationPrompt(ctx);
      ChatRequest req;
      req.model = cfg.client.model_name;
      req.prompt = prompt.text;
      req.temperature = cfg.client.generation_temperature;
      req.max_tokens = cfg.client.generation_max_tokens;
      req.request_tag = "round-" + std::to_string(r);
      pending.push_back(
          {r, std::move(prompt),
           std::async(std::launch::async,
                      [&client, req]() { return client.Complete(req); })});
    }

    for (auto& p : pending) {
      const int r = p.round;
      ChatResponse resp;
      FilterRun run;
      ParsedTuples parsed;
      try {
        resp = p.response.get();
        GeneratedParseOptions popts;
        popts.round = r;
        popts.truncated = resp.finish_reason == FinishReason::kLength;
        popts.long_min_words = cfg.long_min_words;
        // The prompt's examples occupy 1..n, so the model continues at n + 1.
        parsed = ParseGeneratedTuples(
            resp.text, static_cast<int>(p.prompt.source_ids.size()) + 1, popts);
        const Timestamp stamp = cfg.created_at.value_or(NowUtc());
        for (auto& t : parsed.tuples) t.created_at = stamp;
        run = RunFilters(parsed.tuples, pool, client, cfg.filter,
                         "round-" + std::to_string(r));
      } catch (const ClientError& e) {
        if (log) {
          log("stop round=" + std::to_string(r) + " error=" + e.what());
        }
        throw;
      }

      std::string corpus_lines;
      for (const auto& t : run.accepted) {
        corpus_lines += TupleToJsonLine(t);
        corpus_lines.push_back('\n');
      }
      std::string decision_lines;
      for (const auto& d : run.decisions) {
        decision_lines += RoundDecisionLine(r, d);
        decision_lines.push_back('\n');
        if (!d.accepted) ++manifest.rejected_by_stage[d.stage];
      }
      GenerationRound record;
      record.round = r;
      record.sampled_ids = p.prompt.source_ids;
      record.raw_completion = resp.text;
      record.finish_reason = std::string(FinishReasonName(resp.finish_reason));
      record.parsed_count = parsed.tuples.size();
      record.accepted_count = run.accepted.size();
      record.dropped_blocks = parsed.diagnostics.dropped.size();

      AppendFileDurable(paths.corpus, corpus_lines);
      AppendFileDurable(paths.decisions, decision_lines);
      AppendFileDurable(paths.rounds, record.ToJsonLine() + "\n");
      for (auto& t : run.accepted) corpus.push_back(std::move(t));
      manifest.total_generated += record.parsed_count;
      manifest.total_accepted += record.accepted_count;
      manifest.rounds_completed = r;
      manifest.target_reached = manifest.total_accepted >= target;
      WriteFileAtomic(paths.manifest, manifest.ToJson());
      if (log) {
        log("round=" + std::to_string(r) +
            " parsed=" + std::to_string(record.parsed_count) +
            " accepted=" + std::to_string(record.accepted_count) +
            " total=" + std::to_string(manifest.total_accepted));
      }
      if (manifest.target_reached) break;
    }
    next = manifest.rounds_completed + 1;
  }

  if (!fs::exists(paths.manifest)) {
    WriteFileAtomic(paths.manifest, manifest.ToJson());
  }
  if (manifest.target_reached) {
    MakePartitions(corpus, cfg.partition_sizes, cfg.rng_seed, paths.dir);
  } else if (log) {
    log("stopped before target: accepted=" +
        std::to_string(manifest.total_accepted) + " rounds=" +
        std::to_string(manifest.rounds_completed));
  }
  return manifest;
}

std::vector<fs::path> MakePartitions(std::span<const InstructionTuple> corpus,
                                     std::span<const size_t> sizes,
                                     uint64_t rng_seed, const fs::path& out_dir) {
  for (size_t s : sizes) {
    if (s == 0) throw ValidationError("partition sizes must be positive");
    if (s > corpus.size()) {
      throw ValidationError("corpus has " + std::to_string(corpus.size()) +
                            " tuples, partition of " + std::to_string(s) +
                            " requested");
    }
  }
  fs::create_directories(out_dir);
  RunPaths paths(out_dir);
  std::vector<fs::path> written;
  for (size_t s : sizes) {
    Rng rng = Rng::Derive(rng_seed, {kPartitionStream, s});
    std::vector<size_t> idx = rng.SampleIndices(corpus.size(), s);
    std::sort(idx.begin(), idx.end());
    std::vector<InstructionTuple> subset;
    subset.reserve(s);
    for (size_t i : idx) subset.push_back(corpus[i]);
    WriteTuples(subset, paths.Partition(s));
    written.push_back(paths.Partition(s));
  }
  return written;
}

std::vector<fs::path> MakePartitions(const fs::path& corpus_path,
                                     std::span<const size_t> sizes,
                                     uint64_t rng_seed, const fs::path& out_dir) {
  std::vector<InstructionTuple> corpus = LoadTuples(corpus_path);
  return MakePartitions(std::span<const InstructionTuple>(corpus), sizes,
                        rng_seed, out_dir);
}

size_t RenderSftDataset(const fs::path& corpus_path, const fs::path& out_path) {
  std::vector<InstructionTuple> corpus = LoadTuples(corpus_path);
  std::string out;
  for (const auto& t : corpus) {
    ordered_json j;
    j["text_instructions"] = RenderSftExample(t);
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out.push_back('\n');
  }
  WriteFileAtomic(out_path, out);
  return corpus.size();
}

size_t RenderInferenceDataset(const fs::path& tuples_path,
                              const fs::path& out_path) {
  std::vector<InstructionTuple> tuples = LoadTuples(tuples_path);
  std::string out;
  for (const auto& t : tuples) {
    ordered_json j;
    j["id"] = t.id;
    j["prompt"] = RenderInferencePrompt(t.instruction, t.input);
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out.push_back('\n');
  }
  WriteFileAtomic(out_path, out);
  return tuples.size();
}

}  // namespace instructkit
