// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tse/generation.hpp"
#include "tse/scorer_client.hpp"
#include "tse/thought_graph.hpp"

namespace tse {

struct ImportanceScore {
  NodeId node_id = 0;
  double raw_gradient_norm = 0.0;
  double normalized_importance = 0.0;
};

enum class KeySelectMethod { Gradient, SelfPrompt, Random };

std::string_view to_string(KeySelectMethod method);
KeySelectMethod key_select_from_string(std::string_view name);

/// One key node per original chain.
struct KeyNodeSet {
  std::map<ChainId, NodeId> entries;
  KeySelectMethod method = KeySelectMethod::Gradient;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const KeyNodeSet& keys);

/// Per-node importances plus the per-chain loss, as returned by one scorer
/// round over a set of chains.
struct ImportanceTable {
  std::map<NodeId, ImportanceScore> scores;
  std::map<ChainId, double> losses;
  int embedding_dim = 0;
};

nlohmann::json to_json(const ImportanceTable& table);

/// Divides each norm by the sum of its list. An all-zero list yields the
/// uniform distribution. Throws NegativeNorm for negative or non-finite input.
std::vector<double> normalize_importance(std::span<const double> raw_norms);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax_first(std::span<const double> values);

/// Scores `chain_ids` (all original chains when empty) through the scorer and
/// normalizes the returned norms client-side.
ImportanceTable score_chains(const ThoughtStructure& structure, Scorer& scorer,
                             std::vector<ChainId> chain_ids = {});

/// Key node = highest normalized importance per original chain, earliest
/// step on ties. MissingImportance if any node lacks a score.
KeyNodeSet select_key_nodes_gradient(const ThoughtStructure& structure,
                                     const ImportanceTable& table);
KeyNodeSet select_key_nodes_gradient(const ThoughtStructure& structure, Scorer& scorer);

/// Asks the model to rank each chain's steps and keeps the top one. A reply
/// without an in-range step number is re-asked once, then the conclusion
/// node is used and a warning recorded.
KeyNodeSet select_key_nodes_selfprompt(const ThoughtStructure& structure, const LlmContext& ctx,
                                       const std::string& task_text, int workers = 1);

/// Ablation: one uniformly drawn node per chain.
KeyNodeSet select_key_nodes_random(const ThoughtStructure& structure, std::uint64_t seed);

}  // namespace tse
