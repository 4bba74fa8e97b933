// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tse {

/// Defaults follow the experimental setup: temperature 0.7, 50 tokens.
struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.7;
  int max_tokens = 50;
  std::vector<std::string> stop_sequences;

  // Bookkeeping only; never sent to the model nor part of the fixture key.
  std::string template_name;
  std::string tag;
};

enum class FinishReason { Stop, Length, Error };

std::string_view to_string(FinishReason reason);

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    return *this;
  }
};

struct GenerationResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::Stop;
  TokenUsage usage;
  double latency_ms = 0.0;
  int retries = 0;
};

enum class BackendKind { Http, Scripted };

struct BackendConfig {
  BackendKind kind = BackendKind::Scripted;
  std::string base_url;
  std::string model_name;
  std::string api_key_env_var_name = "OPENAI_API_KEY";
  int timeout_ms = 60000;
  int max_retries = 3;
  int backoff_ms = 500;
  int max_in_flight = 4;
  std::string fixture_path;

  /// Throws InvalidConfig when a required field for `kind` is missing.
  void validate() const;
};

nlohmann::json to_json(const BackendConfig& config);
BackendConfig backend_config_from_json(const nlohmann::json& doc);

/// Key under which a scripted fixture stores the reply to `request`.
std::string fixture_key(const GenerationRequest& request);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResponse generate(const GenerationRequest& request) = 0;
};

/// Replays replies recorded in a fixture document (key -> text).
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> fixtures)
      : fixtures_(std::move(fixtures)) {}

  static ScriptedBackend from_file(const std::string& path);

  GenerationResponse generate(const GenerationRequest& request) override;

  std::size_t size() const { return fixtures_.size(); }

 private:
  std::map<std::string, std::string> fixtures_;
};

/// OpenAI-compatible chat-completions client.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig config);

  GenerationResponse generate(const GenerationRequest& request) override;

 private:
  BackendConfig config_;
  std::string api_key_;
  std::counting_semaphore<1024> in_flight_;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// One-shot convenience over make_backend().
GenerationResponse generate(const BackendConfig& config, const GenerationRequest& request);

/// One logged backend call, successful or not.
struct TranscriptEntry {
  std::string tag;
  std::string template_name;
  std::string key;
  std::string system_prompt;
  std::string user_prompt;
  std::string reply;
  std::string finish_reason;
  std::string error;
  TokenUsage usage;
  int retries = 0;
};

nlohmann::json to_json(const TranscriptEntry& entry);

/// Wraps a backend and logs every call. Thread-safe; `entries()` returns the
/// log sorted by tag so concurrent stages still produce a stable order.
class TranscriptBackend final : public Backend {
 public:
  explicit TranscriptBackend(Backend& inner) : inner_(inner) {}

  GenerationResponse generate(const GenerationRequest& request) override;

  std::vector<TranscriptEntry> entries() const;
  TokenUsage usage() const;
  std::size_t call_count() const;
  double latency_ms() const;

 private:
  Backend& inner_;
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
  double latency_ms_ = 0.0;
};

/// Captures successful replies as fixtures, for later replay.
class RecordingBackend final : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  GenerationResponse generate(const GenerationRequest& request) override;

  std::map<std::string, std::string> fixtures() const;
  void write(const std::string& path) const;

 private:
  Backend& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> fixtures_;
};

}  // namespace tse
