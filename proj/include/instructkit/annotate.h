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

#ifndef INSTRUCTKIT_ANNOTATE_H_
#define INSTRUCTKIT_ANNOTATE_H_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "instructkit/evalreport.h"
#include "instructkit/util.h"

namespace instructkit {

struct CampaignItem {
  std::string id;
  std::string instruction;
  std::string input;
};

struct Campaign {
  std::string campaign_id;
  std::vector<CampaignItem> items;
  std::vector<ModelOutputRecord> outputs;
  std::vector<Dimension> dimensions;
  std::vector<std::string> annotators;
  // annotator -> item ids, in queue order. Filled with the default pairing
  // when the campaign file has none.
  std::map<std::string, std::vector<std::string>> assignment;
  uint64_t blinding_seed = 0;

  // Sorted model ids.
  std::vector<std::string> Models() const;
  // Throws ValidationError.
  void Validate() const;
  // Blinded key ("A", "B", ...) -> model id for one item. The permutation is
  // derived from blinding_seed and the item id.
  std::map<std::string, std::string> BlindingFor(const std::string& item_id) const;

  static Campaign FromJson(std::string_view text);
  static Campaign Load(const std::filesystem::path& path);
};

// Annotators a0,a1 share every item of the first pair slot, a2,a3 the
// second, and so on; an odd annotator out is paired with a0. Items are dealt
// to pair slots round-robin.
std::map<std::string, std::vector<std::string>> DefaultAssignment(
    const std::vector<std::string>& annotators,
    const std::vector<std::string>& item_ids);

struct Submission {
  std::string annotator_id;
  std::string item_id;
  std::string blinded_key;
  std::map<std::string, std::string> labels;  // dimension name -> label
  Timestamp timestamp{};
};

struct AnnotatorProgress {
  std::string annotator_id;
  size_t completed = 0;
  size_t total = 0;
};

// Campaign state backed by an append-only JSONL log of submissions. The log
// is replayed on construction; a torn final line is discarded, and cut from
// the file unless the service is read-only.
class AnnotationService {
 public:
  using Clock = std::function<Timestamp()>;

  AnnotationService(Campaign campaign, std::filesystem::path log_path,
                    Clock clock = NowUtc);
  // Never writes the log. Submit throws ConflictError.
  static AnnotationService ReadOnly(Campaign campaign,
                                    std::filesystem::path log_path);

  const Campaign& campaign() const { return campaign_; }

  // Rater-facing JSON payloads. None of them carries a model id.
  std::string CampaignJson() const;
  // Head of the annotator's queue, or nullopt when it is empty. Throws
  // NotFoundError for an unknown annotator.
  std::optional<std::string> NextItemJson(const std::string& annotator_id) const;
  // Returns the ack payload. Throws NotFoundError, ValidationError or
  // ConflictError.
  std::string Submit(const std::string& annotator_id, const std::string& item_id,
                     const std::string& blinded_key,
                     const std::map<std::string, std::string>& labels);
  std::vector<AnnotatorProgress> Progress() const;
  std::string ProgressJson() const;
  size_t QueueLength(const std::string& annotator_id) const;

  // One record per submitted dimension, log order, blinding resolved.
  std::vector<AnnotationRecord> Export() const;
  std::string ExportJsonl() const;

 private:
  AnnotationService(Campaign campaign, std::filesystem::path log_path,
                    Clock clock, bool read_only);

  struct QueueEntry {
    std::string item_id;
    std::string blinded_key;
  };
  struct AnnotatorState {
    std::deque<QueueEntry> queue;
    std::set<std::pair<std::string, std::string>> done;
    size_t total = 0;
  };

  void Apply(const Submission& s);
  void CheckSubmission(const Submission& s) const;
  const AnnotatorState& StateOf(const std::string& annotator_id) const;

  Campaign campaign_;
  std::filesystem::path log_path_;
  Clock clock_;
  bool read_only_ = false;
  std::map<std::string, const CampaignItem*> items_;
  std::map<std::string, std::map<std::string, std::string>> blinding_;
  std::map<std::pair<std::string, std::string>, const ModelOutputRecord*>
      outputs_;
  mutable std::mutex mu_;
  std::map<std::string, AnnotatorState> state_;
  std::vector<Submission> log_;
};

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path campaign_file;
  std::filesystem::path log_file;
  std::filesystem::path static_dir;
  // Empty disables auth. The ANNOTATE_AUTH_TOKEN environment variable
  // overrides the file value.
  std::string auth_token;

  static ServiceConfig Load(const std::filesystem::path& path);
};

class AnnotateServer {
 public:
  AnnotateServer(AnnotationService& service, ServiceConfig config);
  ~AnnotateServer();
  AnnotateServer(const AnnotateServer&) = delete;
  AnnotateServer& operator=(const AnnotateServer&) = delete;

  // Binds config.port (0 picks a free port) and returns the bound port.
  int Bind();
  // Blocks until Stop().
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_ANNOTATE_H_
