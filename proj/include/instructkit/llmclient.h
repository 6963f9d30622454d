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

#ifndef INSTRUCTKIT_LLMCLIENT_H_
#define INSTRUCTKIT_LLMCLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <set>
#include <string>
#include <string_view>

namespace instructkit {

struct ChatRequest {
  std::string model;
  std::string prompt;
  double temperature = 1.0;
  int max_tokens = 2048;
  std::string request_tag;
};

enum class FinishReason { kStop, kLength, kError };
std::string_view FinishReasonName(FinishReason r);

struct ChatResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::kStop;
  int64_t latency_ms = 0;
};

struct RetryPolicy {
  int max_attempts = 4;
  int base_backoff_ms = 500;
  std::set<int> retryable_statuses = {408, 409, 429, 500, 502, 503, 504};
};

using LogSink = std::function<void(std::string_view line)>;
// Writes to stderr.
LogSink StderrLog();

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Throws ClientError when the backend cannot produce a completion.
  virtual ChatResponse Complete(const ChatRequest& request) = 0;
};

// Fixture key of a prompt: SHA-256 hex of its bytes.
std::string PromptKey(std::string_view prompt);

struct HttpClientConfig {
  std::string endpoint_url;  // full URL of the chat-completions endpoint
  std::string model_name;
  int max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

// Speaks the common chat-completions shape: POST {model, messages,
// temperature, max_tokens} with a bearer credential; the first choice's
// message content is the completion.
class HttpChatClient : public ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // Throws ConfigError when `api_key` or the endpoint is empty.
  HttpChatClient(HttpClientConfig config, std::string api_key,
                 LogSink log = StderrLog());
  // Reads the credential from LLM_API_KEY.
  static std::unique_ptr<HttpChatClient> FromEnvironment(
      HttpClientConfig config, LogSink log = StderrLog());

  ChatResponse Complete(const ChatRequest& request) override;

  // For tests: replaces the backoff sleep and the jitter source.
  void SetSleeperForTesting(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  void SetJitterSeed(uint64_t seed);
  int attempts_made() const { return attempts_made_; }

 private:
  struct Endpoint {
    std::string scheme_host_port;
    std::string path;
  };
  static Endpoint ParseEndpoint(const std::string& url);

  HttpClientConfig config_;
  std::string api_key_;
  LogSink log_;
  Endpoint endpoint_;
  Sleeper sleeper_;
  std::counting_semaphore<> in_flight_;
  std::mutex jitter_mu_;
  uint64_t jitter_state_;
  std::atomic<int> attempts_made_{0};
};

// Replays canned completions keyed by PromptKey. Unknown prompts fail
// loudly; nothing is ever fabricated and no network I/O happens.
class FixtureChatClient : public ChatClient {
 public:
  struct Entry {
    std::string completion;
    FinishReason finish_reason = FinishReason::kStop;
  };

  explicit FixtureChatClient(std::map<std::string, Entry> entries)
      : entries_(std::move(entries)) {}
  // JSONL of {"key", "completion"[, "finish_reason"]}.
  static std::unique_ptr<FixtureChatClient> FromFile(
      const std::filesystem::path& path);

  ChatResponse Complete(const ChatRequest& request) override;
  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Entry> entries_;
};

// Calls a function; for tests and synthetic backends.
class ScriptedChatClient : public ChatClient {
 public:
  using Script = std::function<std::string(const ChatRequest&)>;
  explicit ScriptedChatClient(Script script) : script_(std::move(script)) {}
  ChatResponse Complete(const ChatRequest& request) override;

 private:
  Script script_;
};

// Forwards to another client and remembers every (prompt key, completion)
// so a run can be replayed through FixtureChatClient.
class RecordingChatClient : public ChatClient {
 public:
  explicit RecordingChatClient(ChatClient& inner) : inner_(inner) {}
  ChatResponse Complete(const ChatRequest& request) override;
  // Sorted by key, one JSON object per line.
  std::string FixtureJsonl() const;
  void WriteFixture(const std::filesystem::path& path) const;

 private:
  ChatClient& inner_;
  mutable std::mutex mu_;
  std::map<std::string, FixtureChatClient::Entry> recorded_;
};

}  // namespace instructkit

#endif  // INSTRUCTKIT_LLMCLIENT_H_
