// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/scorer_client.hpp"

#include <cmath>

#include <fmt/format.h>
#include <httplib.h>

#include "tse/error.hpp"

namespace tse {

using nlohmann::json;

json to_json(const ScorerEndpointConfig& c) {
  return {{"base_url", c.base_url}, {"model_name", c.model_name}, {"timeout_ms", c.timeout_ms}};
}

ScorerEndpointConfig scorer_config_from_json(const json& doc) {
  if (!doc.is_object()) fail(Errc::InvalidConfig, "scorer must be an object");
  ScorerEndpointConfig c;
  try {
    c.base_url = doc.value("base_url", c.base_url);
    c.model_name = doc.value("model_name", c.model_name);
    c.timeout_ms = doc.value("timeout_ms", c.timeout_ms);
  } catch (const json::exception& e) {
    fail(Errc::InvalidConfig, std::string("scorer: ") + e.what());
  }
  if (c.base_url.empty()) fail(Errc::InvalidConfig, "scorer requires base_url");
  return c;
}

json to_json(const ScoreRequest& r) { return {{"question", r.question}, {"chains", r.chains}}; }

json to_json(const ScoreResponse& r) {
  return {{"losses", r.losses},
          {"raw_norms", r.raw_norms},
          {"importances", r.importances},
          {"embedding_dim", r.embedding_dim}};
}

namespace {

[[noreturn]] void shape(const std::string& what) { fail(Errc::ScorerShapeMismatch, what); }

std::vector<double> finite_list(const json& v, const std::string& where) {
  if (!v.is_array()) shape(where + " is not a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) shape(where + " holds a non-number");
    double d = x.get<double>();
    if (!std::isfinite(d) || d < 0.0) shape(fmt::format("{} holds {}", where, d));
    out.push_back(d);
  }
  return out;
}

}  // namespace

ScoreResponse parse_score_response(const json& body, const ScoreRequest& request) {
  if (!body.is_object()) shape("response is not an object");
  for (const char* key : {"losses", "raw_norms", "importances", "embedding_dim"}) {
    if (!body.contains(key)) shape(std::string("response lacks '") + key + "'");
  }
  ScoreResponse r;
  r.losses = finite_list(body["losses"], "losses");
  const std::size_t n = request.chains.size();
  if (r.losses.size() != n) shape(fmt::format("{} losses for {} chains", r.losses.size(), n));
  const json& norms = body["raw_norms"];
  const json& imps = body["importances"];
  if (!norms.is_array() || norms.size() != n) shape("raw_norms count differs from chain count");
  if (!imps.is_array() || imps.size() != n) shape("importances count differs from chain count");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = request.chains[i].size();
    r.raw_norms.push_back(finite_list(norms[i], fmt::format("raw_norms[{}]", i)));
    r.importances.push_back(finite_list(imps[i], fmt::format("importances[{}]", i)));
    if (r.raw_norms.back().size() != k || r.importances.back().size() != k) {
      shape(fmt::format("chain {} has {} nodes but {} norms / {} importances", i, k,
                        r.raw_norms.back().size(), r.importances.back().size()));
    }
  }
  if (!body["embedding_dim"].is_number_integer()) shape("embedding_dim is not an integer");
  r.embedding_dim = body["embedding_dim"].get<int>();
  return r;
}

ScorerHealth parse_health(const json& body) {
  ScorerHealth h;
  try {
    h.status = body.at("status").get<std::string>();
    h.model_name = body.value("model_name", std::string());
    h.embedding_dim = body.value("embedding_dim", 0);
  } catch (const json::exception& e) {
    fail(Errc::MalformedDocument, std::string("health: ") + e.what());
  }
  return h;
}

namespace {

httplib::Client make_client(const ScorerEndpointConfig& config, std::string& path_prefix) {
  std::string url = config.base_url;
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start != std::string::npos) {
    path_prefix = url.substr(path_start);
    url = url.substr(0, path_start);
  }
  while (!path_prefix.empty() && path_prefix.back() == '/') path_prefix.pop_back();
  httplib::Client client(url);
  const auto timeout = std::chrono::milliseconds(config.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  return client;
}

}  // namespace

ScoreResponse HttpScorer::score(const ScoreRequest& request) {
  std::string prefix;
  auto client = make_client(config_, prefix);
  auto res = client.Post(prefix + "/score", to_json(request).dump(), "application/json");
  if (!res) fail(Errc::ScorerUnavailable, "transport error: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    fail(Errc::ScorerUnavailable, fmt::format("HTTP {}: {}", res->status, res->body));
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::parse_error& e) {
    fail(Errc::ScorerShapeMismatch, std::string("unreadable /score body: ") + e.what());
  }
  return parse_score_response(body, request);
}

ScorerHealth HttpScorer::health() {
  std::string prefix;
  auto client = make_client(config_, prefix);
  auto res = client.Get(prefix + "/health");
  if (!res) fail(Errc::ScorerUnavailable, "transport error: " + httplib::to_string(res.error()));
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) fail(Errc::ScorerUnavailable, fmt::format("HTTP {}", res->status));
  ScorerHealth h = parse_health(body);
  if (res->status != 200 && h.status.empty()) h.status = "unavailable";
  return h;
}

}  // namespace tse
