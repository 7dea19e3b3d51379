#include "rrlab/remote.hpp"

#include <cstdlib>
#include <random>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace rrlab {

namespace {

using nlohmann::json;

bool retryable(int status) { return status == 429 || status >= 500; }

std::string scrub(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos))
    text.replace(pos, secret.size(), "[redacted]");
  return text;
}

double jitter_factor(double jitter) {
  thread_local std::mt19937 gen{std::random_device{}()};
  std::uniform_real_distribution<double> d(1.0 - jitter, 1.0 + jitter);
  return d(gen);
}

}  // namespace

ChatCompletionsClient::ChatCompletionsClient(RemoteConfig cfg) : cfg_(std::move(cfg)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg_.endpoint, m, url))
    throw std::invalid_argument("remote endpoint must be an http(s) URL: " + cfg_.endpoint);
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
  if (cfg_.max_in_flight < 1) throw std::invalid_argument("remote: max_in_flight must be >= 1");
  if (cfg_.retry.attempts < 1) throw std::invalid_argument("remote: retry attempts must be >= 1");
  if (cfg_.model.empty()) throw std::invalid_argument("remote: model name is required");
}

std::string ChatCompletionsClient::request_body(const std::vector<ChatMessage>& messages,
                                                int max_tokens) const {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  json body{{"model", cfg_.model},
            {"messages", std::move(msgs)},
            {"max_tokens", max_tokens},
            {"temperature", cfg_.temperature}};
  return body.dump();
}

int ChatCompletionsClient::peak_in_flight() const {
  std::lock_guard lock(mutex_);
  return peak_in_flight_;
}

void ChatCompletionsClient::acquire() {
  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [&] { return in_flight_ < cfg_.max_in_flight; });
  ++in_flight_;
  peak_in_flight_ = std::max(peak_in_flight_, in_flight_);
}

void ChatCompletionsClient::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  slot_free_.notify_one();
}

Completion ChatCompletionsClient::attempt(const std::string& body, const std::string& key) {
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(cfg_.timeout);
  cli.set_read_timeout(cfg_.timeout);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  httplib::Result res = [&] {
    acquire();
    struct Release {
      ChatCompletionsClient* self;
      ~Release() { self->release(); }
    } guard{this};
    return cli.Post(path_, headers, body, "application/json");
  }();

  if (!res) throw BackendError("transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    const std::string msg =
        "HTTP " + std::to_string(res->status) + ": " + scrub(res->body.substr(0, 300), key);
    if (!retryable(res->status)) throw RequestRejected(res->status, msg);
    throw BackendError(msg);
  }

  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") + e.what());
  }
  Completion out;
  try {
    const auto& choice = parsed.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_null() ? "" : content.get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
      out.finish_reason = choice["finish_reason"].get<std::string>();
    if (parsed.contains("usage") && parsed["usage"].contains("completion_tokens"))
      out.completion_tokens = parsed["usage"]["completion_tokens"].get<int>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected completion schema: ") + e.what());
  }
  return out;
}

Completion ChatCompletionsClient::complete(const std::vector<ChatMessage>& messages, int max_tokens) {
  std::string key;
  if (!cfg_.key_env_var.empty()) {
    const char* env = std::getenv(cfg_.key_env_var.c_str());
    if (!env) throw BackendError("environment variable " + cfg_.key_env_var + " is not set");
    key = env;
  }
  const std::string body = request_body(messages, max_tokens);

  auto delay = cfg_.retry.initial_delay;
  std::string last_error;
  for (int i = 0; i < cfg_.retry.attempts; ++i) {
    if (i > 0) {
      std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
          delay * jitter_factor(cfg_.retry.jitter)));
      delay = std::chrono::duration_cast<std::chrono::milliseconds>(delay * cfg_.retry.backoff);
    }
    try {
      return attempt(body, key);
    } catch (const RequestRejected&) {
      throw;
    } catch (const BackendError& e) {
      last_error = e.what();
    }
  }
  throw BackendError("remote backend failed after " + std::to_string(cfg_.retry.attempts) +
                     " attempts: " + last_error);
}

}  // namespace rrlab
