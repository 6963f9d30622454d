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

#include "instructkit/llmclient.h"

#include <cstdlib>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "instructkit/error.h"
#include "instructkit/util.h"
#include "json.hpp"

namespace instructkit {

namespace {

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

FinishReason ParseFinishReason(std::string_view s) {
  if (s == "length") return FinishReason::kLength;
  if (s == "error") return FinishReason::kError;
  return FinishReason::kStop;
}

}  // namespace

std::string_view FinishReasonName(FinishReason r) {
  switch (r) {
    case FinishReason::kStop:
      return "stop";
    case FinishReason::kLength:
      return "length";
    case FinishReason::kError:
      return "error";
  }
  return "error";
}

LogSink StderrLog() {
  return [](std::string_view line) { std::cerr << line << '\n'; };
}

std::string PromptKey(std::string_view prompt) { return Sha256Hex(prompt); }

HttpChatClient::HttpChatClient(HttpClientConfig config, std::string api_key,
                               LogSink log)
    : config_(std::move(config)),
      api_key_(std::move(api_key)),
      log_(std::move(log)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      in_flight_(config_.max_in_flight > 0 ? config_.max_in_flight : 1),
      jitter_state_(static_cast<uint64_t>(
          std::chrono::steady_clock::now().time_since_epoch().count())) {
  if (api_key_.empty()) {
    throw ConfigError("LLM_API_KEY is not set; the live client needs a credential");
  }
  if (config_.endpoint_url.empty()) throw ConfigError("endpoint_url is not set");
  if (config_.retry.max_attempts < 1) {
    throw ConfigError("retry.max_attempts must be at least 1");
  }
  if (config_.retry.base_backoff_ms < 1) {
    throw ConfigError("retry.base_backoff_ms must be positive");
  }
  endpoint_ = ParseEndpoint(config_.endpoint_url);
}

std::unique_ptr<HttpChatClient> HttpChatClient::FromEnvironment(
    HttpClientConfig config, LogSink log) {
  const char* key = std::getenv("LLM_API_KEY");
  return std::make_unique<HttpChatClient>(std::move(config),
                                          key ? std::string(key) : "",
                                          std::move(log));
}

void HttpChatClient::SetJitterSeed(uint64_t seed) {
  std::lock_guard<std::mutex> lock(jitter_mu_);
  jitter_state_ = seed;
}

HttpChatClient::Endpoint HttpChatClient::ParseEndpoint(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint_url must include a scheme: " + url);
  }
  std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
  }
  size_t path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  if (path_start == std::string::npos) {
    e.scheme_host_port = url;
    e.path = "/";
  } else {
    e.scheme_host_port = url.substr(0, path_start);
    e.path = url.substr(path_start);
  }
  return e;
}

ChatResponse HttpChatClient::Complete(const ChatRequest& request) {
  if (request.prompt.empty()) {
    throw ValidationError("chat request '" + request.request_tag +
                          "' has an empty prompt");
  }
  SemaphoreGuard guard(in_flight_);

  nlohmann::json body;
  body["model"] = request.model.empty() ? config_.model_name : request.model;
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const std::string payload =
      body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  const httplib::Headers headers = {
      {"Authorization", "Bearer " + api_key_}};

  int last_status = 0;
  std::string last_error;
  const auto& policy = config_.retry;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    ++attempts_made_;
    const auto start = std::chrono::steady_clock::now();
    httplib::Client cli(endpoint_.scheme_host_port);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    cli.set_write_timeout(config_.timeout);
    auto res = cli.Post(endpoint_.path, headers, payload, "application/json");
    const int64_t latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    bool retryable = false;
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      retryable = true;
    } else if (res->status == 200) {
      ChatResponse out;
      out.latency_ms = latency;
      try {
        auto j = nlohmann::json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        out.text = choice.at("message").at("content").get<std::string>();
        if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
          out.finish_reason =
              ParseFinishReason(choice["finish_reason"].get<std::string>());
        }
      } catch (const nlohmann::json::exception& e) {
        log_("[llm] tag=" + request.request_tag + " attempt=" +
             std::to_string(attempt) + " malformed response: " + e.what());
        throw ClientError("malformed completion response for '" +
                              request.request_tag + "'",
                          200);
      }
      log_("[llm] tag=" + request.request_tag + " attempt=" +
           std::to_string(attempt) + " status=200 latency_ms=" +
           std::to_string(latency) + " finish=" +
           std::string(FinishReasonName(out.finish_reason)) +
           " chars=" + std::to_string(out.text.size()));
      return out;
    } else {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
      retryable = policy.retryable_statuses.count(res->status) > 0;
    }
    log_("[llm] tag=" + request.request_tag + " attempt=" +
         std::to_string(attempt) + " failed: " + last_error +
         (retryable ? " (retryable)" : " (fatal)"));
    if (!retryable) {
      throw ClientError("request '" + request.request_tag + "' failed: " +
                            last_error,
                        last_status);
    }
    if (attempt < policy.max_attempts) {
      // Full jitter: uniform in [0, base * 2^(attempt-1)].
      const int64_t cap = static_cast<int64_t>(policy.base_backoff_ms)
                          << std::min(attempt - 1, 20);
      uint64_t r;
      {
        std::lock_guard<std::mutex> lock(jitter_mu_);
        r = SplitMix64(jitter_state_);
      }
      sleeper_(std::chrono::milliseconds(
          static_cast<int64_t>(r % static_cast<uint64_t>(cap + 1))));
    }
  }
  throw ClientError("request '" + request.request_tag + "' failed after " +
                        std::to_string(policy.max_attempts) +
                        " attempts; last error: " + last_error,
                    last_status);
}

std::unique_ptr<FixtureChatClient> FixtureChatClient::FromFile(
    const std::filesystem::path& path) {
  std::map<std::string, Entry> entries;
  size_t line_number = 0;
  const std::string text = ReadFile(path);
  for (std::string_view line : SplitLines(text)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      Entry e;
      e.completion = j.at("completion").get<std::string>();
      if (j.contains("finish_reason")) {
        e.finish_reason =
            ParseFinishReason(j["finish_reason"].get<std::string>());
      }
      entries[j.at("key").get<std::string>()] = std::move(e);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": line " +
                            std::to_string(line_number) + ": " + e.what());
    }
  }
  return std::make_unique<FixtureChatClient>(std::move(entries));
}

ChatResponse FixtureChatClient::Complete(const ChatRequest& request) {
  const std::string key = PromptKey(request.prompt);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ClientError("mock fixture has no completion for prompt key " + key +
                          " (request '" + request.request_tag + "')",
                      404);
  }
  return ChatResponse{it->second.completion, it->second.finish_reason, 0};
}

ChatResponse ScriptedChatClient::Complete(const ChatRequest& request) {
  return ChatResponse{script_(request), FinishReason::kStop, 0};
}

ChatResponse RecordingChatClient::Complete(const ChatRequest& request) {
  ChatResponse r = inner_.Complete(request);
  std::lock_guard<std::mutex> lock(mu_);
  recorded_[PromptKey(request.prompt)] = {r.text, r.finish_reason};
  return r;
}

std::string RecordingChatClient::FixtureJsonl() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out;
  for (const auto& [key, entry] : recorded_) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["completion"] = entry.completion;
    if (entry.finish_reason != FinishReason::kStop) {
      j["finish_reason"] = FinishReasonName(entry.finish_reason);
    }
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

void RecordingChatClient::WriteFixture(const std::filesystem::path& path) const {
  WriteFileAtomic(path, FixtureJsonl());
}

}  // namespace instructkit
