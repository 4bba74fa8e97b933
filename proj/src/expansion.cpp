// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include "tse/expansion.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tse/error.hpp"
#include "tse/parallel.hpp"
#include "tse/rng.hpp"
#include "tse/text.hpp"

namespace tse {

using nlohmann::json;

std::string_view to_string(ConnectMode mode) {
  switch (mode) {
    case ConnectMode::Gradient: return "gradient";
    case ConnectMode::Semantic: return "semantic";
    case ConnectMode::Random: return "random";
    case ConnectMode::LayerBased: return "layer_based";
  }
  return "gradient";
}

ConnectMode connect_mode_from_string(std::string_view name) {
  if (name == "gradient") return ConnectMode::Gradient;
  if (name == "semantic") return ConnectMode::Semantic;
  if (name == "random") return ConnectMode::Random;
  if (name == "layer_based") return ConnectMode::LayerBased;
  fail(Errc::InvalidConfig, "unknown connect mode '" + std::string(name) + "'");
}

std::vector<KeyNodePair> enumerate_pairs(const KeyNodeSet& key_nodes, const ExpansionBudget& budget) {
  if (key_nodes.entries.size() < 2) {
    fail(Errc::TooFewChains, fmt::format("need at least 2 chains to pair, have {}", key_nodes.entries.size()));
  }
  std::vector<KeyNodePair> pairs;
  for (auto a = key_nodes.entries.begin(); a != key_nodes.entries.end(); ++a) {
    for (auto b = std::next(a); b != key_nodes.entries.end(); ++b) {
      if (pairs.size() == budget.max_pairs) return pairs;
      pairs.push_back({{a->first, a->second}, {b->first, b->second}});
    }
  }
  return pairs;
}

std::string generate_fusion_node(const LlmContext& ctx, const std::string& task_text,
                                 const std::string& first_text, const std::string& second_text,
                                 const std::string& tag) {
  if (text::is_blank(first_text) || text::is_blank(second_text)) {
    fail(Errc::EmptyNode, "fusion needs two non-empty key-node texts");
  }
  Bindings b{{"task", task_text}, {"first", first_text}, {"second", second_text}};
  std::string reply = ask(ctx, "fusion", b, tag).text;
  if (text::is_blank(reply)) fail(Errc::EmptyFusion, "fusion reply is blank");
  return text::trim_copy(reply);
}

namespace {

int chain_length_of(const ThoughtStructure& s, NodeId node) {
  return static_cast<int>(s.chain(s.node(node).chain_id).length());
}

Connection connect_at(const ThoughtStructure& s, const PairMember& m) {
  return {m.node_id, chain_length_of(s, m.node_id), std::nullopt};
}

}  // namespace

Connection select_connection_gradient(const ThoughtStructure& structure, const KeyNodePair& pair,
                                      const ImportanceTable& importances) {
  auto lookup = [&](NodeId id) {
    auto it = importances.scores.find(id);
    if (it == importances.scores.end()) fail(Errc::MissingImportance, fmt::format("node {} has no importance", id));
    return it->second.normalized_importance;
  };
  const double first = lookup(pair.first.node_id);
  const double second = lookup(pair.second.node_id);
  return connect_at(structure, first >= second ? pair.first : pair.second);
}

Connection select_connection_semantic(const ThoughtStructure& structure, const LlmContext& ctx,
                                      const std::string& task_text, const KeyNodePair& pair,
                                      const std::string& fusion_text, const std::string& tag) {
  Bindings b{{"task", task_text},
             {"first", structure.node(pair.first.node_id).text},
             {"second", structure.node(pair.second.node_id).text},
             {"fusion", fusion_text}};
  for (int attempt = 1; attempt <= 2; ++attempt) {
    if (attempt == 2) b["fusion"] = fusion_text + "\n(Answer with the digit 1 or the digit 2.)";
    std::string reply = ask(ctx, "semantic_connect", b, fmt::format("{}/a{}", tag, attempt)).text;
    if (auto choice = text::first_int_in_range(reply, 1, 2)) {
      return connect_at(structure, *choice == 1 ? pair.first : pair.second);
    }
  }
  Connection c = connect_at(structure, pair.first);
  c.warning = fmt::format("pair ({}, {}): unparseable connection choice twice, using first member",
                          pair.first.chain_id, pair.second.chain_id);
  spdlog::warn("{}", *c.warning);
  return c;
}

Connection select_connection_layer_based(const ThoughtStructure& structure, const KeyNodePair& pair) {
  const int a = structure.node(pair.first.node_id).step_index;
  const int b = structure.node(pair.second.node_id).step_index;
  return connect_at(structure, a <= b ? pair.first : pair.second);
}

Connection select_connection_random(const ThoughtStructure& structure, const KeyNodePair& pair,
                                    bool pick_second) {
  return connect_at(structure, pick_second ? pair.second : pair.first);
}

NewBranch extend_branch(const LlmContext& ctx, const std::string& task_text,
                        const std::vector<std::string>& context_steps, const std::string& fusion_text,
                        int target_depth, const std::string& tag) {
  if (target_depth < 1) fail(Errc::InvalidBranch, "branch depth must be at least 1");
  NewBranch branch;
  branch.fusion_node_text = fusion_text;
  branch.target_depth = target_depth;
  for (int k = 2; k <= target_depth; ++k) {
    const std::size_t ext = static_cast<std::size_t>(k - 1);
    std::string prior;
    if (!branch.extension_texts.empty()) {
      prior = "Steps along the new direction so far:\n" + numbered_list(branch.extension_texts) + "\n";
    }
    Bindings b{{"task", task_text},
               {"context_steps", numbered_list(context_steps)},
               {"fusion", fusion_text},
               {"prior_extensions", prior},
               {"step_number", std::to_string(k)},
               {"depth", std::to_string(target_depth)}};
    std::string reply;
    try {
      reply = ask(ctx, "branch_step", b, fmt::format("{}/s{}", tag, pad(static_cast<std::size_t>(k)))).text;
    } catch (const Error& e) {
      if (e.code() != Errc::FixtureMiss) throw;
      Error err(Errc::TruncatedBranch, fmt::format("extension {}: {}", ext, e.what()));
      err.step = ext;
      throw err;
    }
    if (text::is_blank(reply)) {
      Error err(Errc::TruncatedBranch, fmt::format("extension {} came back empty", ext));
      err.step = ext;
      throw err;
    }
    branch.extension_texts.push_back(text::trim_copy(reply));
  }
  return branch;
}

json to_json(const ExpansionResult& r) {
  auto pair_json = [](const KeyNodePair& p) {
    return json{{"first", {{"chain_id", p.first.chain_id}, {"node_id", p.first.node_id}}},
                {"second", {{"chain_id", p.second.chain_id}, {"node_id", p.second.node_id}}}};
  };
  json pairs = json::array();
  for (const auto& p : r.pairs) pairs.push_back(pair_json(p));
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"pair", pair_json(s.pair)}, {"error", s.error}});
  return {{"pairs", std::move(pairs)},
          {"new_chain_ids", r.new_chain_ids},
          {"skipped", std::move(skipped)},
          {"warnings", r.warnings}};
}

ExpansionResult expand_structure(ThoughtStructure& structure, const KeyNodeSet& key_nodes,
                                 const LlmContext& ctx, const std::string& task_text,
                                 const ExpansionOptions& options, const ImportanceTable* importances) {
  ExpansionResult result;
  if (options.budget.max_pairs == 0) return result;
  if (key_nodes.entries.empty()) fail(Errc::TooFewChains, "no key nodes to expand from");
  if (options.mode == ConnectMode::Gradient && importances == nullptr) {
    fail(Errc::MissingImportance, "gradient connection needs importance scores");
  }

  result.pairs = enumerate_pairs(key_nodes, options.budget);
  const std::size_t n = result.pairs.size();

  // Draw coins up front so the outcome does not depend on worker scheduling.
  std::vector<bool> coins(n, false);
  if (options.mode == ConnectMode::Random) {
    SeededRng rng(options.seed);
    for (std::size_t i = 0; i < n; ++i) coins[i] = rng.coin();
  }

  std::vector<NewBranch> branches(n);
  std::vector<std::string> warnings(n);
  const ThoughtStructure& snapshot = structure;
  auto errors = parallel_for(n, options.workers, [&](std::size_t i) {
    const KeyNodePair& pair = result.pairs[i];
    const std::string tag = fmt::format("3-expand/p{}", pad(i + 1));
    const std::string fusion = generate_fusion_node(ctx, task_text, snapshot.node(pair.first.node_id).text,
                                                    snapshot.node(pair.second.node_id).text, tag + "/1-fusion");
    Connection conn;
    switch (options.mode) {
      case ConnectMode::Gradient: conn = select_connection_gradient(snapshot, pair, *importances); break;
      case ConnectMode::Semantic:
        conn = select_connection_semantic(snapshot, ctx, task_text, pair, fusion, tag + "/2-connect");
        break;
      case ConnectMode::Random: conn = select_connection_random(snapshot, pair, coins[i]); break;
      case ConnectMode::LayerBased: conn = select_connection_layer_based(snapshot, pair); break;
    }
    if (conn.warning) warnings[i] = *conn.warning;

    const ThoughtNode& host = snapshot.node(conn.node_id);
    auto context = snapshot.path_texts(host.chain_id);
    const std::size_t host_len = snapshot.chain(host.chain_id).length();
    context.resize(context.size() - host_len + static_cast<std::size_t>(host.step_index));

    NewBranch branch = extend_branch(ctx, task_text, context, fusion, conn.target_depth, tag + "/3-extend");
    branch.connection_node_id = conn.node_id;
    branch.source_pair = pair;
    branches[i] = std::move(branch);
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (!warnings[i].empty()) result.warnings.push_back(warnings[i]);
    if (errors[i]) {
      std::string message;
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        message = e.what();
      }
      spdlog::warn("skipping pair ({}, {}): {}", result.pairs[i].first.chain_id,
                   result.pairs[i].second.chain_id, message);
      result.skipped.push_back({result.pairs[i], message});
      continue;
    }
    result.new_chain_ids.push_back(structure.attach_branch(branches[i].connection_node_id, branches[i]));
  }
  return result;
}

}  // namespace tse
