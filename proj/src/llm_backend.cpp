// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/llm_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

namespace {

int rough_token_count(std::string_view s) {
  int count = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  UrlParts parts;
  if (path_start == std::string::npos) {
    parts.origin = url;
  } else {
    parts.origin = url.substr(0, path_start);
    parts.path = url.substr(path_start);
  }
  while (!parts.path.empty() && parts.path.back() == '/') parts.path.pop_back();
  return parts;
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Error: return "error";
  }
  return "error";
}

void BackendConfig::validate() const {
  if (kind == BackendKind::Http) {
    if (base_url.empty()) fail(Errc::InvalidConfig, "http backend requires base_url");
    if (model_name.empty()) fail(Errc::InvalidConfig, "http backend requires model_name");
  } else if (fixture_path.empty()) {
    fail(Errc::InvalidConfig, "scripted backend requires fixture_path");
  }
  if (timeout_ms <= 0) fail(Errc::InvalidConfig, "timeout_ms must be positive");
  if (max_retries < 0) fail(Errc::InvalidConfig, "max_retries must be non-negative");
  if (max_in_flight < 1) fail(Errc::InvalidConfig, "max_in_flight must be at least 1");
}

json to_json(const BackendConfig& c) {
  return {{"kind", c.kind == BackendKind::Http ? "http" : "scripted"},
          {"base_url", c.base_url},
          {"model_name", c.model_name},
          {"api_key_env_var_name", c.api_key_env_var_name},
          {"timeout_ms", c.timeout_ms},
          {"max_retries", c.max_retries},
          {"backoff_ms", c.backoff_ms},
          {"max_in_flight", c.max_in_flight},
          {"fixture_path", c.fixture_path}};
}

BackendConfig backend_config_from_json(const json& doc) {
  if (!doc.is_object()) fail(Errc::InvalidConfig, "backend must be an object");
  BackendConfig c;
  try {
    std::string kind = doc.value("kind", std::string("scripted"));
    if (kind == "http") {
      c.kind = BackendKind::Http;
    } else if (kind == "scripted") {
      c.kind = BackendKind::Scripted;
    } else {
      fail(Errc::InvalidConfig, "unknown backend kind '" + kind + "'");
    }
    c.base_url = doc.value("base_url", c.base_url);
    c.model_name = doc.value("model_name", c.model_name);
    c.api_key_env_var_name = doc.value("api_key_env_var_name", c.api_key_env_var_name);
    c.timeout_ms = doc.value("timeout_ms", c.timeout_ms);
    c.max_retries = doc.value("max_retries", c.max_retries);
    c.backoff_ms = doc.value("backoff_ms", c.backoff_ms);
    c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
    c.fixture_path = doc.value("fixture_path", c.fixture_path);
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("backend: ") + e.what());
  }
  return c;
}

std::string fixture_key(const GenerationRequest& request) {
  std::string material = request.system_prompt;
  material.push_back('\x1f');
  material += request.user_prompt;
  return text::sha256_hex(material).substr(0, 32);
}

// ---------------------------------------------------------------------------

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open fixture file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(Errc::MalformedDocument, fmt::format("{} byte {}: {}", path, e.byte, e.what()));
  }
  if (!doc.is_object()) fail(Errc::MalformedDocument, path + ": fixtures must be a flat object");
  std::map<std::string, std::string> fixtures;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) fail(Errc::MalformedDocument, path + ": fixture '" + key + "' is not text");
    fixtures.emplace(key, value.get<std::string>());
  }
  return ScriptedBackend(std::move(fixtures));
}

GenerationResponse ScriptedBackend::generate(const GenerationRequest& request) {
  const std::string key = fixture_key(request);
  auto it = fixtures_.find(key);
  if (it == fixtures_.end()) {
    fail(Errc::FixtureMiss, fmt::format("no fixture for key {} (template '{}', tag '{}')", key,
                                        request.template_name, request.tag));
  }
  GenerationResponse r;
  r.text = it->second;
  r.finish_reason = FinishReason::Stop;
  r.usage.prompt_tokens = rough_token_count(request.system_prompt) + rough_token_count(request.user_prompt);
  r.usage.completion_tokens = rough_token_count(r.text);
  return r;
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), in_flight_(std::min(config_.max_in_flight, 1024)) {
  config_.validate();
  if (!config_.api_key_env_var_name.empty()) {
    if (const char* key = std::getenv(config_.api_key_env_var_name.c_str())) api_key_ = key;
  }
}

GenerationResponse HttpBackend::generate(const GenerationRequest& request) {
  json messages = json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
  json body = {{"model", config_.model_name},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  if (!request.stop_sequences.empty()) body["stop"] = request.stop_sequences;
  const std::string payload = body.dump();

  const UrlParts url = split_url(config_.base_url);
  const std::string path = url.path + "/v1/chat/completions";
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& sem;
    ~Release() { sem.release(); }
  } release{in_flight_};

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(static_cast<long long>(config_.backoff_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      spdlog::warn("chat completion attempt {} failed: {}", attempt + 1, last_error);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      fail(Errc::AuthError, fmt::format("HTTP {} from {}", res->status, config_.base_url));
    }
    if (transient_status(res->status)) {
      last_error = fmt::format("HTTP {}", res->status);
      spdlog::warn("chat completion attempt {} got {}", attempt + 1, last_error);
      continue;
    }
    if (res->status != 200) {
      fail(Errc::BackendUnavailable, fmt::format("HTTP {}: {}", res->status, res->body));
    }

    GenerationResponse out;
    out.retries = attempt;
    try {
      json doc = json::parse(res->body);
      const json& choice = doc.at("choices").at(0);
      const json& content = choice.at("message").at("content");
      out.text = content.is_string() ? content.get<std::string>() : std::string();
      std::string reason = choice.value("finish_reason", std::string("stop"));
      out.finish_reason = reason == "stop"     ? FinishReason::Stop
                          : reason == "length" ? FinishReason::Length
                                               : FinishReason::Error;
      if (doc.contains("usage") && doc["usage"].is_object()) {
        out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
        out.usage.completion_tokens = doc["usage"].value("completion_tokens", 0);
      }
    } catch (const json::exception& e) {
      fail(Errc::BackendUnavailable, std::string("unreadable completion: ") + e.what());
    }
    out.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  }
  fail(Errc::BackendUnavailable,
       fmt::format("gave up after {} retries: {}", config_.max_retries, last_error));
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  config.validate();
  if (config.kind == BackendKind::Http) return std::make_unique<HttpBackend>(config);
  return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(config.fixture_path));
}

GenerationResponse generate(const BackendConfig& config, const GenerationRequest& request) {
  return make_backend(config)->generate(request);
}

// ---------------------------------------------------------------------------

json to_json(const TranscriptEntry& e) {
  json j = {{"tag", e.tag},
            {"template", e.template_name},
            {"key", e.key},
            {"system_prompt", e.system_prompt},
            {"user_prompt", e.user_prompt},
            {"reply", e.reply},
            {"finish_reason", e.finish_reason},
            {"prompt_tokens", e.usage.prompt_tokens},
            {"completion_tokens", e.usage.completion_tokens},
            {"retries", e.retries}};
  if (!e.error.empty()) j["error"] = e.error;
  return j;
}

GenerationResponse TranscriptBackend::generate(const GenerationRequest& request) {
  TranscriptEntry entry;
  entry.tag = request.tag;
  entry.template_name = request.template_name;
  entry.key = fixture_key(request);
  entry.system_prompt = request.system_prompt;
  entry.user_prompt = request.user_prompt;
  try {
    GenerationResponse r = inner_.generate(request);
    entry.reply = r.text;
    entry.finish_reason = std::string(to_string(r.finish_reason));
    entry.usage = r.usage;
    entry.retries = r.retries;
    std::lock_guard lock(mu_);
    latency_ms_ += r.latency_ms;
    entries_.push_back(std::move(entry));
    return r;
  } catch (const std::exception& e) {
    entry.finish_reason = "error";
    entry.error = e.what();
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(entry));
    throw;
  }
}

std::vector<TranscriptEntry> TranscriptBackend::entries() const {
  std::lock_guard lock(mu_);
  auto out = entries_;
  std::stable_sort(out.begin(), out.end(),
                   [](const TranscriptEntry& a, const TranscriptEntry& b) { return a.tag < b.tag; });
  return out;
}

TokenUsage TranscriptBackend::usage() const {
  std::lock_guard lock(mu_);
  TokenUsage total;
  for (const auto& e : entries_) total += e.usage;
  return total;
}

std::size_t TranscriptBackend::call_count() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

double TranscriptBackend::latency_ms() const {
  std::lock_guard lock(mu_);
  return latency_ms_;
}

// ---------------------------------------------------------------------------

GenerationResponse RecordingBackend::generate(const GenerationRequest& request) {
  GenerationResponse r = inner_.generate(request);
  std::lock_guard lock(mu_);
  fixtures_[fixture_key(request)] = r.text;
  return r;
}

std::map<std::string, std::string> RecordingBackend::fixtures() const {
  std::lock_guard lock(mu_);
  return fixtures_;
}

void RecordingBackend::write(const std::string& path) const {
  json doc = json::object();
  for (const auto& [key, text] : fixtures()) doc[key] = text;
  std::ofstream out(path);
  if (!out) fail(Errc::Io, "cannot write fixtures to " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace tse
