// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tse {

struct ScorerEndpointConfig {
  std::string base_url;
  std::string model_name;
  int timeout_ms = 120000;
};

nlohmann::json to_json(const ScorerEndpointConfig& config);
ScorerEndpointConfig scorer_config_from_json(const nlohmann::json& doc);

// Wire types for POST /score. Field names are the contract with the scorer
// service.
struct ScoreRequest {
  std::string question;
  std::vector<std::vector<std::string>> chains;
};

struct ScoreResponse {
  std::vector<double> losses;                    // one per chain
  std::vector<std::vector<double>> raw_norms;    // one per node
  std::vector<std::vector<double>> importances;  // one per node
  int embedding_dim = 0;
};

struct ScorerHealth {
  std::string status;
  std::string model_name;
  int embedding_dim = 0;
};

nlohmann::json to_json(const ScoreRequest& request);
nlohmann::json to_json(const ScoreResponse& response);

/// Decodes a /score body and checks it against the request's shape:
/// ScorerShapeMismatch on count mismatches, negative or non-finite values.
ScoreResponse parse_score_response(const nlohmann::json& body, const ScoreRequest& request);

ScorerHealth parse_health(const nlohmann::json& body);

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScoreResponse score(const ScoreRequest& request) = 0;
};

class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(ScorerEndpointConfig config) : config_(std::move(config)) {}

  ScoreResponse score(const ScoreRequest& request) override;
  ScorerHealth health();

 private:
  ScorerEndpointConfig config_;
};

}  // namespace tse
