// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/importance.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/parallel.hpp"
#include "tse/rng.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

std::string_view to_string(KeySelectMethod method) {
  switch (method) {
    case KeySelectMethod::Gradient: return "gradient";
    case KeySelectMethod::SelfPrompt: return "selfprompt";
    case KeySelectMethod::Random: return "random";
  }
  return "gradient";
}

KeySelectMethod key_select_from_string(std::string_view name) {
  if (name == "gradient") return KeySelectMethod::Gradient;
  if (name == "selfprompt") return KeySelectMethod::SelfPrompt;
  if (name == "random") return KeySelectMethod::Random;
  fail(Errc::InvalidConfig, "unknown key-select method '" + std::string(name) + "'");
}

json to_json(const KeyNodeSet& keys) {
  json entries = json::array();
  for (const auto& [chain, node] : keys.entries) entries.push_back({{"chain_id", chain}, {"node_id", node}});
  return {{"method", to_string(keys.method)}, {"entries", std::move(entries)}, {"warnings", keys.warnings}};
}

json to_json(const ImportanceTable& table) {
  json scores = json::array();
  for (const auto& [id, s] : table.scores) {
    scores.push_back({{"node_id", id},
                      {"raw_gradient_norm", s.raw_gradient_norm},
                      {"normalized_importance", s.normalized_importance}});
  }
  json losses = json::array();
  for (const auto& [chain, loss] : table.losses) losses.push_back({{"chain_id", chain}, {"loss", loss}});
  return {{"scores", std::move(scores)}, {"losses", std::move(losses)}, {"embedding_dim", table.embedding_dim}};
}

std::vector<double> normalize_importance(std::span<const double> raw_norms) {
  if (raw_norms.empty()) fail(Errc::NegativeNorm, "cannot normalize an empty list");
  double total = 0.0;
  for (double g : raw_norms) {
    if (!(g >= 0.0) || !std::isfinite(g)) fail(Errc::NegativeNorm, fmt::format("norm {} is not a non-negative number", g));
    total += g;
  }
  std::vector<double> out(raw_norms.size());
  if (total == 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw_norms[i] / total;
  return out;
}

std::size_t argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ImportanceTable score_chains(const ThoughtStructure& structure, Scorer& scorer,
                             std::vector<ChainId> chain_ids) {
  if (chain_ids.empty()) chain_ids = structure.chain_ids(ChainKind::Original);
  ScoreRequest req;
  req.question = structure.question();
  for (ChainId id : chain_ids) {
    std::vector<std::string> texts;
    for (NodeId nid : structure.chain(id).node_ids) texts.push_back(structure.node(nid).text);
    req.chains.push_back(std::move(texts));
  }
  ScoreResponse resp = scorer.score(req);
  if (resp.raw_norms.size() != chain_ids.size() || resp.losses.size() != chain_ids.size()) {
    fail(Errc::ScorerShapeMismatch, "scorer answered for a different number of chains");
  }

  ImportanceTable table;
  table.embedding_dim = resp.embedding_dim;
  for (std::size_t i = 0; i < chain_ids.size(); ++i) {
    const auto& nodes = structure.chain(chain_ids[i]).node_ids;
    if (resp.raw_norms[i].size() != nodes.size()) {
      fail(Errc::ScorerShapeMismatch, fmt::format("chain {}: {} scores for {} nodes", chain_ids[i],
                                                  resp.raw_norms[i].size(), nodes.size()));
    }
    auto normalized = normalize_importance(resp.raw_norms[i]);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      table.scores[nodes[j]] = {nodes[j], resp.raw_norms[i][j], normalized[j]};
    }
    table.losses[chain_ids[i]] = resp.losses[i];
  }
  return table;
}

KeyNodeSet select_key_nodes_gradient(const ThoughtStructure& structure, const ImportanceTable& table) {
  KeyNodeSet keys;
  keys.method = KeySelectMethod::Gradient;
  for (const auto& chain : structure.chains()) {
    if (chain.kind != ChainKind::Original) continue;
    std::vector<double> imps;
    for (NodeId nid : chain.node_ids) {
      auto it = table.scores.find(nid);
      if (it == table.scores.end()) fail(Errc::MissingImportance, fmt::format("node {} has no importance", nid));
      imps.push_back(it->second.normalized_importance);
    }
    keys.entries[chain.chain_id] = chain.node_ids[argmax_first(imps)];
  }
  return keys;
}

KeyNodeSet select_key_nodes_gradient(const ThoughtStructure& structure, Scorer& scorer) {
  return select_key_nodes_gradient(structure, score_chains(structure, scorer));
}

KeyNodeSet select_key_nodes_selfprompt(const ThoughtStructure& structure, const LlmContext& ctx,
                                       const std::string& task_text, int workers) {
  const auto chain_ids = structure.chain_ids(ChainKind::Original);
  std::vector<NodeId> picks(chain_ids.size());
  std::vector<std::string> warnings(chain_ids.size());

  parallel_for_all(chain_ids.size(), workers, [&](std::size_t i) {
    const auto& chain = structure.chain(chain_ids[i]);
    std::vector<std::string> texts;
    for (NodeId nid : chain.node_ids) texts.push_back(structure.node(nid).text);
    const int count = static_cast<int>(texts.size());
    Bindings b{{"task", task_text}, {"numbered_steps", numbered_list(texts)}, {"count", std::to_string(count)}};
    for (int attempt = 1; attempt <= 2; ++attempt) {
      // The re-ask has to differ from the first prompt or a fixture replay
      // would return the same reply.
      if (attempt == 2) b["numbered_steps"] = numbered_list(texts) + "\n(Reply with a step number from 1 to " + std::to_string(count) + ".)";
      std::string reply =
          ask(ctx, "node_rank", b, fmt::format("2-keys/c{}/a{}", pad(chain.chain_id), attempt)).text;
      if (auto idx = text::first_int_in_range(reply, 1, count)) {
        picks[i] = chain.node_ids[static_cast<std::size_t>(*idx - 1)];
        return;
      }
    }
    picks[i] = chain.node_ids.back();
    warnings[i] = fmt::format("chain {}: unparseable ranking twice, using conclusion node", chain.chain_id);
    spdlog::warn("{}", warnings[i]);
  });

  KeyNodeSet keys;
  keys.method = KeySelectMethod::SelfPrompt;
  for (std::size_t i = 0; i < chain_ids.size(); ++i) {
    keys.entries[chain_ids[i]] = picks[i];
    if (!warnings[i].empty()) keys.warnings.push_back(warnings[i]);
  }
  return keys;
}

KeyNodeSet select_key_nodes_random(const ThoughtStructure& structure, std::uint64_t seed) {
  SeededRng rng(seed);
  KeyNodeSet keys;
  keys.method = KeySelectMethod::Random;
  for (const auto& chain : structure.chains()) {
    if (chain.kind != ChainKind::Original) continue;
    keys.entries[chain.chain_id] = chain.node_ids[rng.below(chain.node_ids.size())];
  }
  return keys;
}

}  // namespace tse
