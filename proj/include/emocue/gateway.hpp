#pragma once

// Inference backends and completion parsing.
//
// Backend config (JSON):
//   {"backend": "mock" | "http", "endpoint_url": "https://host/v1/chat/completions",
//    "model_id": ..., "api_key_env": "ENV_NAME", "timeout_s": 60,
//    "max_retries": 3, "max_concurrent": 4, "temperature": 0.0,
//    "max_tokens": 512, "backoff_ms": 200, "fixture_id": "default",
//    "mock_fixture": "path/to/completions.json"}
//
// The http backend posts a chat-completions request
//   {"model", "messages": [{"role": "user", "content": prompt}],
//    "temperature", "max_tokens"}
// and reads choices[0].message.content. 5xx, 429, timeouts and connection
// failures are retried with exponential backoff.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "emocue/error.hpp"
#include "emocue/prediction.hpp"
#include "emocue/prompts.hpp"

namespace emocue {

enum class BackendKind { Mock, Http };
std::string_view to_string(BackendKind kind);

struct BackendConfig {
  BackendKind backend = BackendKind::Mock;
  std::string endpoint_url;
  std::string model_id = "mock";
  std::string api_key_env;
  double timeout_s = 60.0;
  int max_retries = 3;
  int max_concurrent = 4;
  double temperature = 0.0;
  int max_tokens = 512;
  int backoff_ms = 200;
  /// Salt of the mock backend; different ids give different completions.
  std::string fixture_id = "default";
  /// Optional JSON object {prompt id: completion text} served by the mock
  /// backend before its rules apply.
  std::string mock_fixture;

  /// Throws InvalidArgument.
  void validate() const;
};

nlohmann::ordered_json to_json(const BackendConfig& config);
/// Missing keys keep their defaults. Throws ParseError or InvalidArgument.
BackendConfig backend_config_from_json(const nlohmann::json& j);
BackendConfig load_backend_config(const std::filesystem::path& path);

struct RawCompletion {
  std::string text;
  double latency_ms = 0.0;
  nlohmann::ordered_json backend_meta = nlohmann::ordered_json::object();
};

/// Sends prompts to the configured backend. complete() may be called from
/// any number of threads; at most max_concurrent requests are in flight.
class Gateway {
 public:
  explicit Gateway(BackendConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Throws Timeout, HttpError(status) or RetriesExhausted.
  RawCompletion complete(const PromptInstance& prompt);

  const BackendConfig& config() const noexcept { return config_; }

  /// Replaces the pause between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper);

 private:
  RawCompletion complete_mock(const PromptInstance& prompt) const;
  RawCompletion complete_http(const PromptInstance& prompt);

  BackendConfig config_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::map<std::string, std::string> fixture_;
  std::function<void(std::chrono::milliseconds)> sleep_;
};

/// One-shot convenience wrapper.
RawCompletion complete(const PromptInstance& prompt, const BackendConfig& config);

struct CompletionOutcome {
  std::optional<RawCompletion> completion;
  std::optional<Errc> error;
  std::string error_message;
};

/// Completes every prompt using up to max_concurrent worker threads.
/// Results keep the order of `prompts`; failures are captured per prompt.
std::vector<CompletionOutcome> complete_all(Gateway& gateway,
                                            const std::vector<PromptInstance>& prompts);

/// Strict JSON, then the first balanced JSON object in the text, then a
/// "Classification: ..." line. Throws Unparseable.
Prediction parse_prediction(const RawCompletion& raw);
Prediction parse_prediction(std::string_view text);

}  // namespace emocue
