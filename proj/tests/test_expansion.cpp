// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <regex>

#include "synthetic_backend.hpp"
#include "tse/error.hpp"
#include "tse/expansion.hpp"
#include "tse/prompts.hpp"

using namespace tse;
using tse::testing::FunctionBackend;

namespace {

// Chain c (1-based) has `lengths[c-1]` steps; step j of chain c reads
// "c<c> s<j>".
ThoughtStructure build(const std::vector<int>& lengths) {
  ThoughtStructure s("q");
  for (std::size_t c = 0; c < lengths.size(); ++c) {
    std::vector<std::string> t;
    for (int j = 1; j <= lengths[c]; ++j) t.push_back(fmt::format("c{} s{}", c + 1, j));
    s.add_chain(t);
  }
  return s;
}

NodeId node_at(const ThoughtStructure& s, ChainId c, int step) { return s.chain(c).node_ids[step - 1]; }

KeyNodeSet keys_at(const ThoughtStructure& s, int step) {
  KeyNodeSet k;
  for (const auto& c : s.chains()) k.entries[c.chain_id] = c.node_ids[std::min<std::size_t>(step, c.length()) - 1];
  return k;
}

std::string default_reply(const GenerationRequest& r) {
  if (r.template_name == "fusion") return "fused idea";
  if (r.template_name == "semantic_connect") return "2";
  static const std::regex step_re(R"(Write step (\d+) of)");
  std::smatch m;
  if (std::regex_search(r.user_prompt, m, step_re)) return "ext " + m[1].str();
  return "?";
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

ImportanceTable table_with(std::map<NodeId, double> imps) {
  ImportanceTable t;
  for (auto [id, v] : imps) t.scores[id] = {id, v, v};
  return t;
}

}  // namespace

TEST_CASE("enumerate_pairs order and budget") {
  auto s = build({5, 5, 5, 5, 5});
  const auto keys = keys_at(s, 1);
  CHECK(enumerate_pairs(keys, {10}).size() == 10);
  CHECK(enumerate_pairs(keys, {50}).size() == 10);
  const auto three = enumerate_pairs(keys, {3});
  REQUIRE(three.size() == 3);
  CHECK(three[0].first.chain_id == 1);
  CHECK(three[0].second.chain_id == 2);
  CHECK(three[1].second.chain_id == 3);
  CHECK(three[2].second.chain_id == 4);
  CHECK(three[2].second.node_id == node_at(s, 4, 1));
  CHECK(enumerate_pairs(keys, {0}).empty());

  auto one = build({3});
  CHECK(code_of([&] { enumerate_pairs(keys_at(one, 1), {5}); }) == Errc::TooFewChains);
}

TEST_CASE("fusion node") {
  FunctionBackend backend([](const GenerationRequest& r) {
    return r.user_prompt.find("Insight 1: blank") != std::string::npos ? std::string("   ") : std::string(" F \n");
  });
  LlmContext ctx{backend, PromptLibrary::builtin()};
  CHECK(generate_fusion_node(ctx, "task", "A", "B") == "F");
  CHECK(generate_fusion_node(ctx, "task", "same", "same") == "F");
  CHECK(backend.requests().size() == 2);
  CHECK(backend.requests()[0].user_prompt.find("Insight 2: B") != std::string::npos);
  CHECK(code_of([&] { generate_fusion_node(ctx, "task", "blank", "B"); }) == Errc::EmptyFusion);
}

TEST_CASE("gradient connection") {
  auto s = build({5, 4});
  const NodeId a = node_at(s, 1, 2);
  const NodeId b = node_at(s, 2, 3);
  const KeyNodePair pair{{1, a}, {2, b}};

  auto c = select_connection_gradient(s, pair, table_with({{a, 0.6}, {b, 0.4}}));
  CHECK(c.node_id == a);
  CHECK(c.target_depth == 5);

  c = select_connection_gradient(s, pair, table_with({{a, 0.3}, {b, 0.4}}));
  CHECK(c.node_id == b);
  CHECK(c.target_depth == 4);

  c = select_connection_gradient(s, pair, table_with({{a, 0.5}, {b, 0.5}}));
  CHECK(c.node_id == a);

  CHECK(code_of([&] { select_connection_gradient(s, pair, table_with({{a, 0.5}})); }) == Errc::MissingImportance);
}

TEST_CASE("gradient connection is invariant to rescaling raw norms") {
  auto s = build({3, 3});
  const KeyNodePair pair{{1, node_at(s, 1, 1)}, {2, node_at(s, 2, 2)}};
  for (double scale : {1e-6, 0.5, 3.0, 1e6}) {
    const std::vector<double> g1{2.0 * scale, 1.0 * scale, 1.0 * scale};
    const std::vector<double> g2{1.0 * scale, 3.0 * scale, 1.0 * scale};
    const auto n1 = normalize_importance(g1);
    const auto n2 = normalize_importance(g2);
    ImportanceTable t;
    for (int j = 0; j < 3; ++j) {
      t.scores[node_at(s, 1, j + 1)] = {node_at(s, 1, j + 1), g1[j], n1[j]};
      t.scores[node_at(s, 2, j + 1)] = {node_at(s, 2, j + 1), g2[j], n2[j]};
    }
    CHECK(select_connection_gradient(s, pair, t).node_id == pair.second.node_id);
  }
}

TEST_CASE("semantic connection") {
  auto s = build({5, 3});
  const KeyNodePair pair{{1, node_at(s, 1, 2)}, {2, node_at(s, 2, 1)}};
  auto run = [&](std::function<std::string(const GenerationRequest&)> fn) {
    FunctionBackend backend(std::move(fn));
    LlmContext ctx{backend, PromptLibrary::builtin()};
    auto c = select_connection_semantic(s, ctx, "task", pair, "F");
    return std::make_pair(c, backend.requests().size());
  };

  auto [c2, n2] = run([](const GenerationRequest&) { return "2"; });
  CHECK(c2.node_id == pair.second.node_id);
  CHECK(c2.target_depth == 3);
  CHECK(n2 == 1);

  auto [c1, n1] = run([](const GenerationRequest&) { return "the first one"; });
  CHECK(c1.node_id == pair.first.node_id);
  CHECK(c1.target_depth == 5);
  CHECK(!c1.warning);

  auto [cr, nr] = run([](const GenerationRequest& r) { return r.tag.ends_with("/a1") ? "hmm" : "Insight 2."; });
  CHECK(cr.node_id == pair.second.node_id);
  CHECK(nr == 2);

  auto [cf, nf] = run([](const GenerationRequest&) { return "both, really"; });
  CHECK(cf.node_id == pair.first.node_id);
  CHECK(cf.warning.has_value());
  CHECK(nf == 2);
}

TEST_CASE("ablation connections") {
  auto s = build({5, 5});
  const KeyNodePair deeper_first{{1, node_at(s, 1, 4)}, {2, node_at(s, 2, 2)}};
  CHECK(select_connection_layer_based(s, deeper_first).node_id == deeper_first.second.node_id);
  const KeyNodePair tie{{1, node_at(s, 1, 3)}, {2, node_at(s, 2, 3)}};
  CHECK(select_connection_layer_based(s, tie).node_id == tie.first.node_id);
  CHECK(select_connection_random(s, tie, false).node_id == tie.first.node_id);
  CHECK(select_connection_random(s, tie, true).node_id == tie.second.node_id);
}

TEST_CASE("extend_branch") {
  FunctionBackend backend(default_reply);
  LlmContext ctx{backend, PromptLibrary::builtin()};
  const auto br = extend_branch(ctx, "task", {"c1 s1", "c1 s2"}, "F", 5);
  CHECK(br.fusion_node_text == "F");
  CHECK(br.extension_texts == std::vector<std::string>{"ext 2", "ext 3", "ext 4", "ext 5"});
  CHECK(br.target_depth == 5);
  const auto reqs = backend.requests();
  REQUIRE(reqs.size() == 4);
  CHECK(reqs[0].template_name == "branch_step");
  CHECK(reqs[3].user_prompt.find("ext 4") != std::string::npos);
  CHECK(reqs[0].user_prompt.find("2. c1 s2") != std::string::npos);

  const auto alone = extend_branch(ctx, "task", {"c1 s1"}, "F", 1);
  CHECK(alone.extension_texts.empty());

  FunctionBackend blank([](const GenerationRequest& r) {
    return r.user_prompt.find("Write step 3 of") != std::string::npos ? std::string("") : default_reply(r);
  });
  LlmContext bctx{blank, PromptLibrary::builtin()};
  try {
    extend_branch(bctx, "task", {"x"}, "F", 5);
    FAIL("expected TruncatedBranch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TruncatedBranch);
    CHECK(e.step == std::optional<std::size_t>(2));
  }
}

TEST_CASE("expand_structure end to end") {
  auto s = build({5, 5, 5, 5, 5});
  const auto before = s;
  const auto keys = keys_at(s, 2);

  SUBCASE("all pairs succeed") {
    FunctionBackend backend(default_reply);
    LlmContext ctx{backend, PromptLibrary::builtin()};
    ExpansionOptions opts;
    opts.mode = ConnectMode::Semantic;
    opts.budget.max_pairs = 10;
    opts.workers = 4;
    const auto r = expand_structure(s, keys, ctx, "task", opts);
    CHECK(r.new_chain_ids.size() == 10);
    CHECK(r.skipped.empty());
    CHECK(s.chains().size() == 15);
    CHECK(s.validate().empty());
    // New chain ids follow pair order.
    for (std::size_t i = 0; i < r.new_chain_ids.size(); ++i) {
      const auto& fusion = s.node(s.chain(r.new_chain_ids[i]).node_ids[0]);
      CHECK(fusion.origin == NodeOrigin::Fusion);
      REQUIRE(fusion.provenance.size() == 2);
      CHECK(fusion.provenance[0] == r.pairs[i].first.node_id);
      CHECK(fusion.provenance[1] == r.pairs[i].second.node_id);
      CHECK(s.node(fusion.provenance[0]).chain_id != s.node(fusion.provenance[1]).chain_id);
    }
    // The original structure is untouched inside the expanded one.
    for (const auto& [id, n] : before.nodes()) CHECK(s.node(id) == n);
    for (std::size_t i = 0; i < before.edges().size(); ++i) CHECK(s.edges()[i] == before.edges()[i]);
    for (const auto& c : before.chains()) CHECK(s.chain(c.chain_id) == c);
  }

  SUBCASE("a failing pair is skipped") {
    FunctionBackend backend([](const GenerationRequest& r) -> std::string {
      if (r.template_name == "fusion" && r.user_prompt.find("Insight 1: c1 s2\nInsight 2: c3 s2") != std::string::npos) {
        fail(Errc::FixtureMiss, "no fixture");
      }
      return default_reply(r);
    });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    ExpansionOptions opts;
    opts.mode = ConnectMode::LayerBased;
    opts.budget.max_pairs = 10;
    const auto r = expand_structure(s, keys, ctx, "task", opts);
    CHECK(r.new_chain_ids.size() == 9);
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].pair.first.chain_id == 1);
    CHECK(r.skipped[0].pair.second.chain_id == 3);
    CHECK(s.chains().size() == 14);
    CHECK(s.validate().empty());
  }

  SUBCASE("zero budget leaves the structure alone") {
    FunctionBackend backend(default_reply);
    LlmContext ctx{backend, PromptLibrary::builtin()};
    ExpansionOptions opts;
    opts.budget.max_pairs = 0;
    opts.mode = ConnectMode::Semantic;
    const auto r = expand_structure(s, keys, ctx, "task", opts);
    CHECK(r.new_chain_ids.empty());
    CHECK(s == before);
    CHECK(backend.requests().empty());
  }

  SUBCASE("gradient mode needs importances") {
    FunctionBackend backend(default_reply);
    LlmContext ctx{backend, PromptLibrary::builtin()};
    ExpansionOptions opts;
    opts.mode = ConnectMode::Gradient;
    CHECK(code_of([&] { expand_structure(s, keys, ctx, "task", opts); }) == Errc::MissingImportance);
  }

  SUBCASE("random mode is seeded") {
    auto run = [&](std::uint64_t seed) {
      auto copy = before;
      FunctionBackend backend(default_reply);
      LlmContext ctx{backend, PromptLibrary::builtin()};
      ExpansionOptions opts;
      opts.mode = ConnectMode::Random;
      opts.seed = seed;
      opts.budget.max_pairs = 10;
      expand_structure(copy, keys, ctx, "task", opts);
      return serialize(copy);
    };
    CHECK(run(7) == run(7));
    std::set<std::string> distinct;
    for (std::uint64_t seed = 0; seed < 8; ++seed) distinct.insert(run(seed));
    CHECK(distinct.size() > 1);
  }
}

TEST_CASE("connect mode names") {
  for (auto m : {ConnectMode::Gradient, ConnectMode::Semantic, ConnectMode::Random, ConnectMode::LayerBased}) {
    CHECK(connect_mode_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(connect_mode_from_string("telepathic"), Error);
}
