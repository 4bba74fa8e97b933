// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tse {

using NodeId = std::int64_t;
using ChainId = std::int64_t;

enum class NodeOrigin { Initial, Fusion, Extension };
enum class ChainKind { Original, NewBranch };

std::string_view to_string(NodeOrigin origin);
std::string_view to_string(ChainKind kind);

/// One reasoning sentence: step `step_index` of chain `chain_id`.
struct ThoughtNode {
  NodeId id = 0;
  ChainId chain_id = 0;
  int step_index = 1;
  std::string text;
  NodeOrigin origin = NodeOrigin::Initial;
  // Empty for initial nodes, the two key nodes for a fusion node and the
  // previous branch node for an extension.
  std::vector<NodeId> provenance;

  bool operator==(const ThoughtNode&) const = default;
};

struct ThoughtChain {
  ChainId chain_id = 0;
  std::vector<NodeId> node_ids;
  ChainKind kind = ChainKind::Original;
  // Branch chains number their nodes from 1; the depth of the node they hang
  // from is kept here (0 for original chains).
  int attach_depth = 0;

  std::size_t length() const { return node_ids.size(); }
  bool operator==(const ThoughtChain&) const = default;
};

struct Attachment {
  NodeId from_node = 0;
  ChainId to_chain = 0;

  bool operator==(const Attachment&) const = default;
};

/// Which chains have been realized. The unexplored remainder is never
/// materialized.
struct ExplorationRecord {
  std::set<ChainId> explored_chain_ids;
  std::set<ChainId> new_branch_ids;

  bool operator==(const ExplorationRecord&) const = default;
};

/// Endpoint of a fusion pair: a key node and the chain that owns it.
struct PairMember {
  ChainId chain_id = 0;
  NodeId node_id = 0;

  bool operator==(const PairMember&) const = default;
};

struct KeyNodePair {
  PairMember first;
  PairMember second;

  bool operator==(const KeyNodePair&) const = default;
};

/// A fusion node plus its extensions, ready to hang from `connection_node_id`.
struct NewBranch {
  std::string fusion_node_text;
  std::vector<std::string> extension_texts;
  NodeId connection_node_id = 0;
  KeyNodePair source_pair;
  int target_depth = 1;
};

class ThoughtStructure {
 public:
  ThoughtStructure() = default;
  explicit ThoughtStructure(std::string question) : question_(std::move(question)) {}

  const std::string& question() const { return question_; }
  const std::vector<ThoughtChain>& chains() const { return chains_; }
  const std::map<NodeId, ThoughtNode>& nodes() const { return nodes_; }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
  const std::vector<Attachment>& attachments() const { return attachments_; }
  const ExplorationRecord& exploration() const { return exploration_; }

  const ThoughtNode& node(NodeId id) const;
  const ThoughtChain& chain(ChainId id) const;
  bool has_node(NodeId id) const { return nodes_.count(id) != 0; }
  bool has_chain(ChainId id) const;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::vector<ChainId> chain_ids(ChainKind kind) const;

  /// Texts from the chain's root down to its conclusion. For a branch this is
  /// the host chain prefix up to the connection node followed by the branch.
  std::vector<std::string> path_texts(ChainId id) const;

  /// Appends an original chain, one node per sentence.
  ChainId add_chain(const std::vector<std::string>& texts,
                    ChainKind kind = ChainKind::Original);

  /// Hangs `branch` beneath `connection_node_id` as a new chain.
  ChainId attach_branch(NodeId connection_node_id, const NewBranch& branch);

  /// Every structural invariant that fails, one message each.
  std::vector<std::string> validate() const;

  bool operator==(const ThoughtStructure&) const = default;

 private:
  friend ThoughtStructure structure_from_json(const nlohmann::json& doc);

  bool acyclic() const;

  std::string question_;
  std::vector<ThoughtChain> chains_;
  std::map<NodeId, ThoughtNode> nodes_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::vector<Attachment> attachments_;
  ExplorationRecord exploration_;
  NodeId next_node_id_ = 1;
  ChainId next_chain_id_ = 1;
};

nlohmann::json structure_to_json(const ThoughtStructure& structure);
ThoughtStructure structure_from_json(const nlohmann::json& doc);

std::string serialize(const ThoughtStructure& structure);
ThoughtStructure deserialize(std::string_view document);

}  // namespace tse
