// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tse/generation.hpp"
#include "tse/importance.hpp"
#include "tse/thought_graph.hpp"

namespace tse {

/// At most `max_pairs` key-node pairs are realized, taken in lexicographic
/// chain-id order.
struct ExpansionBudget {
  std::size_t max_pairs = 5;
};

enum class ConnectMode { Gradient, Semantic, Random, LayerBased };

std::string_view to_string(ConnectMode mode);
ConnectMode connect_mode_from_string(std::string_view name);

/// Unordered pairs {i, l}, i < l, of distinct original chains.
std::vector<KeyNodePair> enumerate_pairs(const KeyNodeSet& key_nodes, const ExpansionBudget& budget);

/// One sentence combining both key-node texts. EmptyFusion on a blank reply.
std::string generate_fusion_node(const LlmContext& ctx, const std::string& task_text,
                                 const std::string& first_text, const std::string& second_text,
                                 const std::string& tag = "3-expand/fusion");

struct Connection {
  NodeId node_id = 0;
  int target_depth = 1;
  std::optional<std::string> warning;
};

/// The pair member with the larger normalized importance hosts the branch,
/// the first member on ties; the branch runs to the host chain's length.
Connection select_connection_gradient(const ThoughtStructure& structure, const KeyNodePair& pair,
                                      const ImportanceTable& importances);

/// Asks which key node the fusion node follows from ("1" or "2"). One
/// re-ask on an unparseable reply, then the first member with a warning.
Connection select_connection_semantic(const ThoughtStructure& structure, const LlmContext& ctx,
                                      const std::string& task_text, const KeyNodePair& pair,
                                      const std::string& fusion_text,
                                      const std::string& tag = "3-expand/connect");

/// Ablation: shallower step index wins, first member on ties.
Connection select_connection_layer_based(const ThoughtStructure& structure, const KeyNodePair& pair);

/// Ablation: `pick_second` chooses the member.
Connection select_connection_random(const ThoughtStructure& structure, const KeyNodePair& pair,
                                    bool pick_second);

/// Grows the fusion node into a branch of `target_depth` nodes in total,
/// one call per extension. `context_steps` is the host chain prefix ending
/// at the connection node. TruncatedBranch(step) on a blank reply.
NewBranch extend_branch(const LlmContext& ctx, const std::string& task_text,
                        const std::vector<std::string>& context_steps, const std::string& fusion_text,
                        int target_depth, const std::string& tag = "3-expand/extend");

struct SkippedPair {
  KeyNodePair pair;
  std::string error;
};

struct ExpansionResult {
  std::vector<ChainId> new_chain_ids;
  std::vector<KeyNodePair> pairs;
  std::vector<SkippedPair> skipped;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const ExpansionResult& result);

struct ExpansionOptions {
  ConnectMode mode = ConnectMode::Gradient;
  ExpansionBudget budget;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Fusion, connection and extension for every budgeted pair, then attaches
/// the branches in pair order. A pair that fails is skipped and reported;
/// it never aborts the others. Gradient mode needs `importances`.
ExpansionResult expand_structure(ThoughtStructure& structure, const KeyNodeSet& key_nodes,
                                 const LlmContext& ctx, const std::string& task_text,
                                 const ExpansionOptions& options,
                                 const ImportanceTable* importances = nullptr);

}  // namespace tse
