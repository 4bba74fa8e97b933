// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/thought_graph.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "tse/error.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

std::string_view to_string(NodeOrigin origin) {
  switch (origin) {
    case NodeOrigin::Initial: return "initial";
    case NodeOrigin::Fusion: return "fusion";
    case NodeOrigin::Extension: return "extension";
  }
  return "initial";
}

std::string_view to_string(ChainKind kind) {
  return kind == ChainKind::Original ? "original" : "new_branch";
}

const ThoughtNode& ThoughtStructure::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) fail(Errc::UnknownNode, fmt::format("node {} does not exist", id));
  return it->second;
}

const ThoughtChain& ThoughtStructure::chain(ChainId id) const {
  for (const auto& c : chains_) {
    if (c.chain_id == id) return c;
  }
  fail(Errc::UnknownNode, fmt::format("chain {} does not exist", id));
}

bool ThoughtStructure::has_chain(ChainId id) const {
  return std::any_of(chains_.begin(), chains_.end(),
                     [id](const ThoughtChain& c) { return c.chain_id == id; });
}

std::vector<ChainId> ThoughtStructure::chain_ids(ChainKind kind) const {
  std::vector<ChainId> out;
  for (const auto& c : chains_) {
    if (c.kind == kind) out.push_back(c.chain_id);
  }
  return out;
}

std::vector<std::string> ThoughtStructure::path_texts(ChainId id) const {
  const ThoughtChain& c = chain(id);
  std::vector<std::string> out;
  if (c.kind == ChainKind::NewBranch) {
    auto att = std::find_if(attachments_.begin(), attachments_.end(),
                            [id](const Attachment& a) { return a.to_chain == id; });
    if (att != attachments_.end()) {
      const ThoughtNode& host = node(att->from_node);
      auto prefix = path_texts(host.chain_id);
      std::size_t keep = 0;
      // Host prefix ends at the connection node.
      const ThoughtChain& host_chain = chain(host.chain_id);
      for (std::size_t k = 0; k < host_chain.node_ids.size(); ++k) {
        if (host_chain.node_ids[k] == host.id) {
          keep = prefix.size() - host_chain.node_ids.size() + k + 1;
          break;
        }
      }
      prefix.resize(keep);
      out = std::move(prefix);
    }
  }
  for (NodeId nid : c.node_ids) out.push_back(node(nid).text);
  return out;
}

ChainId ThoughtStructure::add_chain(const std::vector<std::string>& texts, ChainKind kind) {
  if (texts.empty()) fail(Errc::EmptyChain, "a chain needs at least one sentence");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::is_blank(texts[i])) fail(Errc::EmptyNode, fmt::format("sentence {} is blank", i + 1));
  }
  if (kind != ChainKind::Original) {
    fail(Errc::InvalidBranch, "new_branch chains are created through attach_branch");
  }

  ThoughtChain chain;
  chain.chain_id = next_chain_id_++;
  chain.kind = kind;
  NodeId prev = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    ThoughtNode n;
    n.id = next_node_id_++;
    n.chain_id = chain.chain_id;
    n.step_index = static_cast<int>(i) + 1;
    n.text = texts[i];
    n.origin = NodeOrigin::Initial;
    if (prev != 0) edges_.emplace_back(prev, n.id);
    prev = n.id;
    chain.node_ids.push_back(n.id);
    nodes_.emplace(n.id, std::move(n));
  }
  exploration_.explored_chain_ids.insert(chain.chain_id);
  chains_.push_back(std::move(chain));
  return chains_.back().chain_id;
}

ChainId ThoughtStructure::attach_branch(NodeId connection_node_id, const NewBranch& branch) {
  auto host_it = nodes_.find(connection_node_id);
  if (host_it == nodes_.end()) {
    fail(Errc::UnknownNode, fmt::format("connection node {} does not exist", connection_node_id));
  }
  const auto& pair = branch.source_pair;
  for (NodeId parent : {pair.first.node_id, pair.second.node_id}) {
    if (!has_node(parent)) fail(Errc::UnknownNode, fmt::format("key node {} does not exist", parent));
  }
  if (node(pair.first.node_id).chain_id == node(pair.second.node_id).chain_id) {
    fail(Errc::InvalidBranch, "fusion parents must come from two distinct chains");
  }
  if (text::is_blank(branch.fusion_node_text)) fail(Errc::EmptyNode, "fusion node text is blank");
  for (std::size_t i = 0; i < branch.extension_texts.size(); ++i) {
    if (text::is_blank(branch.extension_texts[i])) {
      fail(Errc::EmptyNode, fmt::format("extension {} is blank", i + 1));
    }
  }

  // Build on a copy so a failed cycle check leaves *this untouched.
  ThoughtStructure next = *this;
  ThoughtChain chain;
  chain.chain_id = next.next_chain_id_++;
  chain.kind = ChainKind::NewBranch;
  chain.attach_depth = host_it->second.step_index;

  NodeId prev = 0;
  const std::size_t total = 1 + branch.extension_texts.size();
  for (std::size_t i = 0; i < total; ++i) {
    ThoughtNode n;
    n.id = next.next_node_id_++;
    n.chain_id = chain.chain_id;
    n.step_index = static_cast<int>(i) + 1;
    if (i == 0) {
      n.text = branch.fusion_node_text;
      n.origin = NodeOrigin::Fusion;
      n.provenance = {pair.first.node_id, pair.second.node_id};
      next.edges_.emplace_back(connection_node_id, n.id);
    } else {
      n.text = branch.extension_texts[i - 1];
      n.origin = NodeOrigin::Extension;
      n.provenance = {prev};
      next.edges_.emplace_back(prev, n.id);
    }
    prev = n.id;
    chain.node_ids.push_back(n.id);
    next.nodes_.emplace(n.id, std::move(n));
  }
  next.attachments_.push_back({connection_node_id, chain.chain_id});
  next.exploration_.explored_chain_ids.insert(chain.chain_id);
  next.exploration_.new_branch_ids.insert(chain.chain_id);
  next.chains_.push_back(std::move(chain));

  if (!next.acyclic()) fail(Errc::CycleDetected, "attaching the branch would create a cycle");
  *this = std::move(next);
  return chains_.back().chain_id;
}

bool ThoughtStructure::acyclic() const {
  std::map<NodeId, int> indegree;
  std::map<NodeId, std::vector<NodeId>> out;
  for (const auto& [id, _] : nodes_) indegree[id] = 0;
  for (const auto& [from, to] : edges_) {
    out[from].push_back(to);
    ++indegree[to];
  }
  std::deque<NodeId> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    NodeId id = ready.front();
    ready.pop_front();
    ++seen;
    for (NodeId to : out[id]) {
      if (--indegree[to] == 0) ready.push_back(to);
    }
  }
  return seen == indegree.size();
}

std::vector<std::string> ThoughtStructure::validate() const {
  std::vector<std::string> issues;
  std::set<std::pair<NodeId, NodeId>> expected_edges;
  std::set<NodeId> chain_roots;
  std::size_t total_nodes = 0;

  for (const auto& c : chains_) {
    if (c.node_ids.empty()) issues.push_back(fmt::format("chain {} is empty", c.chain_id));
    total_nodes += c.node_ids.size();
    for (std::size_t k = 0; k < c.node_ids.size(); ++k) {
      auto it = nodes_.find(c.node_ids[k]);
      if (it == nodes_.end()) {
        issues.push_back(fmt::format("chain {} lists missing node {}", c.chain_id, c.node_ids[k]));
        continue;
      }
      const ThoughtNode& n = it->second;
      if (n.chain_id != c.chain_id) {
        issues.push_back(fmt::format("node {} claims chain {} but sits in {}", n.id, n.chain_id, c.chain_id));
      }
      if (n.step_index != static_cast<int>(k) + 1) {
        issues.push_back(fmt::format("node {} has step {} at position {}", n.id, n.step_index, k + 1));
      }
      if (text::is_blank(n.text)) issues.push_back(fmt::format("node {} is blank", n.id));
      if (k > 0) expected_edges.emplace(c.node_ids[k - 1], n.id);

      const bool first = k == 0;
      switch (n.origin) {
        case NodeOrigin::Initial:
          if (c.kind != ChainKind::Original || !n.provenance.empty()) {
            issues.push_back(fmt::format("initial node {} is misplaced or has provenance", n.id));
          }
          break;
        case NodeOrigin::Fusion: {
          bool ok = c.kind == ChainKind::NewBranch && first && n.provenance.size() == 2;
          if (ok) {
            auto a = nodes_.find(n.provenance[0]);
            auto b = nodes_.find(n.provenance[1]);
            ok = a != nodes_.end() && b != nodes_.end() &&
                 a->second.chain_id != b->second.chain_id;
          }
          if (!ok) issues.push_back(fmt::format("fusion node {} needs two parents from distinct chains", n.id));
          break;
        }
        case NodeOrigin::Extension:
          if (c.kind != ChainKind::NewBranch || first || n.provenance.size() != 1 ||
              n.provenance[0] != c.node_ids[k - 1]) {
            issues.push_back(fmt::format("extension node {} has bad provenance", n.id));
          }
          break;
      }
    }
    if (!c.node_ids.empty()) chain_roots.insert(c.node_ids.front());
    if (c.kind == ChainKind::NewBranch && !c.node_ids.empty()) {
      auto att = std::find_if(attachments_.begin(), attachments_.end(),
                              [&](const Attachment& a) { return a.to_chain == c.chain_id; });
      if (att == attachments_.end()) {
        issues.push_back(fmt::format("branch chain {} has no attachment", c.chain_id));
      } else {
        expected_edges.emplace(att->from_node, c.node_ids.front());
        auto host = nodes_.find(att->from_node);
        if (host == nodes_.end() || host->second.step_index != c.attach_depth) {
          issues.push_back(fmt::format("branch chain {} has a wrong attach depth", c.chain_id));
        }
      }
    }
  }

  if (total_nodes != nodes_.size()) {
    issues.push_back(fmt::format("|V|={} but chains hold {} nodes", nodes_.size(), total_nodes));
  }
  std::set<std::pair<NodeId, NodeId>> actual(edges_.begin(), edges_.end());
  if (actual.size() != edges_.size()) issues.push_back("duplicate edges");
  if (actual != expected_edges) issues.push_back("edge set differs from chain order plus attachments");
  if (!acyclic()) issues.push_back("graph has a cycle");

  // Reachability from original chain roots.
  std::map<NodeId, std::vector<NodeId>> out;
  for (const auto& [from, to] : edges_) out[from].push_back(to);
  std::set<NodeId> reached;
  std::deque<NodeId> frontier;
  for (const auto& c : chains_) {
    if (c.kind == ChainKind::Original && !c.node_ids.empty()) frontier.push_back(c.node_ids.front());
  }
  while (!frontier.empty()) {
    NodeId id = frontier.front();
    frontier.pop_front();
    if (!reached.insert(id).second) continue;
    for (NodeId to : out[id]) frontier.push_back(to);
  }
  if (reached.size() != nodes_.size()) issues.push_back("some nodes are unreachable from chain roots");

  std::set<ChainId> ids;
  std::set<ChainId> branch_ids;
  for (const auto& c : chains_) {
    ids.insert(c.chain_id);
    if (c.kind == ChainKind::NewBranch) branch_ids.insert(c.chain_id);
  }
  if (exploration_.explored_chain_ids != ids) issues.push_back("explored set differs from chain ids");
  if (exploration_.new_branch_ids != branch_ids) issues.push_back("new-branch set differs from branch chains");
  return issues;
}

// ---------------------------------------------------------------------------
// Serialization

json structure_to_json(const ThoughtStructure& s) {
  json chains = json::array();
  for (const auto& c : s.chains()) {
    json nodes = json::array();
    for (NodeId id : c.node_ids) {
      const ThoughtNode& n = s.node(id);
      nodes.push_back({{"id", n.id},
                       {"step_index", n.step_index},
                       {"text", n.text},
                       {"origin", to_string(n.origin)},
                       {"provenance", n.provenance}});
    }
    chains.push_back({{"chain_id", c.chain_id}, {"kind", to_string(c.kind)}, {"nodes", std::move(nodes)}});
  }
  json attachments = json::array();
  for (const auto& a : s.attachments()) {
    attachments.push_back({{"from_node", a.from_node}, {"to_chain", a.to_chain}});
  }
  return {{"question", s.question()}, {"chains", std::move(chains)}, {"attachments", std::move(attachments)}};
}

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  Error e(Errc::MalformedDocument, fmt::format("at {}: {}", where, what));
  throw e;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) malformed(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where, fmt::format("missing field '{}'", key));
  return *it;
}

std::int64_t int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) malformed(where + "/" + key, "expected an integer");
  return v.get<std::int64_t>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) malformed(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

const json& array_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) malformed(where + "/" + key, "expected an array");
  return v;
}

}  // namespace

ThoughtStructure structure_from_json(const json& doc) {
  ThoughtStructure s(string_field(doc, "question", ""));
  const json& chains = array_field(doc, "chains", "");
  const json& attachments = array_field(doc, "attachments", "");

  for (std::size_t ci = 0; ci < chains.size(); ++ci) {
    const std::string where = fmt::format("/chains/{}", ci);
    const json& jc = chains[ci];
    ThoughtChain c;
    c.chain_id = int_field(jc, "chain_id", where);
    const std::string kind = string_field(jc, "kind", where);
    if (kind == "original") {
      c.kind = ChainKind::Original;
    } else if (kind == "new_branch") {
      c.kind = ChainKind::NewBranch;
    } else {
      malformed(where + "/kind", "unknown chain kind '" + kind + "'");
    }
    const json& nodes = array_field(jc, "nodes", where);
    for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
      const std::string nwhere = fmt::format("{}/nodes/{}", where, ni);
      const json& jn = nodes[ni];
      ThoughtNode n;
      n.id = int_field(jn, "id", nwhere);
      n.chain_id = c.chain_id;
      n.step_index = static_cast<int>(int_field(jn, "step_index", nwhere));
      n.text = string_field(jn, "text", nwhere);
      const std::string origin = string_field(jn, "origin", nwhere);
      if (origin == "initial") {
        n.origin = NodeOrigin::Initial;
      } else if (origin == "fusion") {
        n.origin = NodeOrigin::Fusion;
      } else if (origin == "extension") {
        n.origin = NodeOrigin::Extension;
      } else {
        malformed(nwhere + "/origin", "unknown origin '" + origin + "'");
      }
      const json& prov = array_field(jn, "provenance", nwhere);
      for (const auto& p : prov) {
        if (!p.is_number_integer()) malformed(nwhere + "/provenance", "expected integers");
        n.provenance.push_back(p.get<NodeId>());
      }
      if (s.nodes_.count(n.id) != 0) malformed(nwhere + "/id", "duplicate node id");
      if (ni > 0) s.edges_.emplace_back(c.node_ids.back(), n.id);
      c.node_ids.push_back(n.id);
      s.next_node_id_ = std::max(s.next_node_id_, n.id + 1);
      s.nodes_.emplace(n.id, std::move(n));
    }
    if (c.node_ids.empty()) malformed(where + "/nodes", "a chain needs at least one node");
    s.exploration_.explored_chain_ids.insert(c.chain_id);
    if (c.kind == ChainKind::NewBranch) s.exploration_.new_branch_ids.insert(c.chain_id);
    s.next_chain_id_ = std::max(s.next_chain_id_, c.chain_id + 1);
    s.chains_.push_back(std::move(c));
  }

  for (std::size_t ai = 0; ai < attachments.size(); ++ai) {
    const std::string where = fmt::format("/attachments/{}", ai);
    Attachment a{int_field(attachments[ai], "from_node", where),
                 int_field(attachments[ai], "to_chain", where)};
    auto target = std::find_if(s.chains_.begin(), s.chains_.end(),
                               [&](const ThoughtChain& c) { return c.chain_id == a.to_chain; });
    if (target == s.chains_.end() || target->kind != ChainKind::NewBranch) {
      malformed(where + "/to_chain", "attachment must point at a new_branch chain");
    }
    auto host = s.nodes_.find(a.from_node);
    if (host == s.nodes_.end()) malformed(where + "/from_node", "unknown node");
    target->attach_depth = host->second.step_index;
    s.edges_.emplace_back(a.from_node, target->node_ids.front());
    s.attachments_.push_back(a);
  }

  // Serialized order is chain order, not insertion order; restore the edge
  // list to the order mutations would have produced.
  std::vector<std::pair<NodeId, NodeId>> ordered;
  for (const auto& c : s.chains_) {
    if (c.kind == ChainKind::NewBranch) {
      for (const auto& a : s.attachments_) {
        if (a.to_chain == c.chain_id) ordered.emplace_back(a.from_node, c.node_ids.front());
      }
    }
    for (std::size_t k = 1; k < c.node_ids.size(); ++k) ordered.emplace_back(c.node_ids[k - 1], c.node_ids[k]);
  }
  if (ordered.size() == s.edges_.size()) s.edges_ = std::move(ordered);

  auto issues = s.validate();
  if (!issues.empty()) malformed("/", issues.front());
  return s;
}

std::string serialize(const ThoughtStructure& structure) {
  return structure_to_json(structure).dump(2);
}

ThoughtStructure deserialize(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    Error err(Errc::MalformedDocument, fmt::format("byte {}: {}", e.byte, e.what()));
    err.position = e.byte;
    throw err;
  }
  return structure_from_json(doc);
}

}  // namespace tse
