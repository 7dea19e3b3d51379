#pragma once

// OpenAI-compatible chat-completions client with bounded retries and a
// process-wide cap on in-flight requests.

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>
#include <vector>

#include "rrlab/agents.hpp"

namespace rrlab {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  double backoff = 2.0;
  /// Each delay is scaled by a uniform factor in [1 - jitter, 1 + jitter].
  double jitter = 0.25;
};

struct RemoteConfig {
  /// Full URL of the chat-completions route,
  /// e.g. https://api.openai.com/v1/chat/completions.
  std::string endpoint;
  std::string model;
  double temperature = 0.7;
  /// Name of the environment variable holding the bearer token. The token
  /// itself is never stored in configuration.
  std::string key_env_var = "OPENAI_API_KEY";
  int max_in_flight = 4;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

struct Completion {
  std::string text;
  std::string finish_reason;
  int completion_tokens = -1;
};

/// 4xx other than 429: the server understood and refused the request.
class RequestRejected : public BackendError {
 public:
  RequestRejected(int status, const std::string& what) : BackendError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

class ChatCompletionsClient {
 public:
  explicit ChatCompletionsClient(RemoteConfig cfg);

  /// Throws RequestRejected on a non-retryable refusal and BackendError once
  /// retries are exhausted.
  Completion complete(const std::vector<ChatMessage>& messages, int max_tokens);

  std::string request_body(const std::vector<ChatMessage>& messages, int max_tokens) const;
  const RemoteConfig& config() const { return cfg_; }
  int peak_in_flight() const;

 private:
  Completion attempt(const std::string& body, const std::string& key);
  void acquire();
  void release();

  RemoteConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;

  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
};

/// Text placed before the trajectory when a backend refuses an
/// assistant-prefix continuation.
inline constexpr const char* kContinuationWrapper = "Continue this reasoning exactly where it stops:";
inline constexpr const char* kFallbackFlag = "continuation_fallback";

}  // namespace rrlab
