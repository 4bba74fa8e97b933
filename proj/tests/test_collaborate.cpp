// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "synthetic_backend.hpp"
#include "tse/collaborate.hpp"
#include "tse/error.hpp"
#include "tse/prompts.hpp"
#include "tse/rng.hpp"

using namespace tse;
using tse::testing::FakeScorer;
using tse::testing::FunctionBackend;

namespace {

const AnswerKey kIdentity{[](const std::string& s) { return s; }, true};

// One chain per conclusion, each chain two steps long.
ThoughtStructure with_conclusions(const std::vector<std::string>& conclusions) {
  ThoughtStructure s("q");
  for (std::size_t i = 0; i < conclusions.size(); ++i) s.add_chain({fmt::format("work {}", i + 1), conclusions[i]});
  return s;
}

std::vector<ChainId> all_chains(const ThoughtStructure& s) {
  std::vector<ChainId> out;
  for (const auto& c : s.chains()) out.push_back(c.chain_id);
  return out;
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

}  // namespace

TEST_CASE("compute_weights examples") {
  const auto w0 = compute_weights(std::vector<double>{0, 0});
  CHECK(w0[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w0[1] == doctest::Approx(0.5).epsilon(1e-15));
  const auto w1 = compute_weights(std::vector<double>{0, std::log(3.0)});
  CHECK(std::fabs(w1[0] - 0.75) <= 1e-12);
  CHECK(std::fabs(w1[1] - 0.25) <= 1e-12);
  CHECK(compute_weights(std::vector<double>{2.0}) == std::vector<double>{1.0});
  CHECK(code_of([] { compute_weights(std::vector<double>{}); }) == Errc::NonFiniteLoss);
  CHECK(code_of([] { compute_weights(std::vector<double>{1.0, NAN}); }) == Errc::NonFiniteLoss);
  CHECK(code_of([] { compute_weights(std::vector<double>{INFINITY}); }) == Errc::NonFiniteLoss);
}

TEST_CASE("compute_weights properties") {
  SeededRng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> l(n);
    for (double& x : l) x = rng.unit() * 20.0;
    const auto w = compute_weights(l);
    // Oracle: direct long-double softmax.
    long double z = 0;
    for (double x : l) z += std::exp(-static_cast<long double>(x));
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(w[i] > 0.0);
      CHECK(w[i] <= 1.0);
      CHECK(std::fabs(w[i] - static_cast<double>(std::exp(-static_cast<long double>(l[i])) / z)) <= 1e-12);
      sum += w[i];
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-9);
    // Shift invariance, including shifts that would underflow a naive softmax.
    const double c = (rng.unit() - 0.5) * 2000.0;
    std::vector<double> shifted(l);
    for (double& x : shifted) x += c;
    const auto ws = compute_weights(shifted);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(ws[i] - w[i]) <= 1e-9);
    // Monotone decreasing in loss.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (l[i] < l[j]) CHECK(w[i] >= w[j]);
      }
    }
  }
}

TEST_CASE("collaborative_score examples") {
  const std::vector<CandidateAnswer> ab{{"A", {1}}, {"B", {2}}};
  const std::vector<NodeWeight> two{{10, 0, 0.5}, {20, 0, 0.5}};
  AlignmentTable t{{{10, "A"}, 1.0}, {{20, "A"}, 1.0}, {{10, "B"}, 0.0}, {{20, "B"}, 0.0}};
  auto s = collaborative_score(ab, two, t);
  CHECK(s[0].score == 1.0);
  CHECK(s[1].score == 0.0);
  CHECK(decide(s, CollabMethod::Cws).decision.text == "A");

  const auto one = collaborative_score({{"A", {1}}}, {{10, 0, 1.0}}, {{{10, "A"}, 0.3}});
  CHECK(one[0].score == doctest::Approx(0.3).epsilon(1e-15));

  AlignmentTable flat{{{10, "A"}, 0.4}, {{20, "A"}, 0.4}, {{10, "B"}, 0.4}, {{20, "B"}, 0.4}};
  s = collaborative_score(ab, two, flat);
  CHECK(s[0].score == s[1].score);

  t.erase({20, "B"});
  CHECK(code_of([&] { collaborative_score(ab, two, t); }) == Errc::MissingAlignment);
}

TEST_CASE("decide tie-breaks") {
  CHECK(decide({{{"A", {1}}, 1.0}, {{"B", {2}}, 0.0}}, CollabMethod::Cws).decision.text == "A");
  CHECK(decide({{{"B", {1}}, 0.5}, {{"A", {2, 3, 4}}, 0.5}}, CollabMethod::Cws).decision.text == "A");
  CHECK(decide({{{"Z", {1, 2, 3}}, 0.5}, {{"A", {4}}, 0.5}}, CollabMethod::Cws).decision.text == "Z");
  CHECK(decide({{{"b", {1}}, 0.5}, {{"a", {2}}, 0.5}}, CollabMethod::Cws).decision.text == "a");
  CHECK(code_of([] { decide({}, CollabMethod::Cws); }) == Errc::NoCandidates);
}

TEST_CASE("decide is invariant under positive affine rescaling") {
  SeededRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ReasoningScore> scores;
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      std::set<ChainId> src;
      for (std::size_t k = 0; k <= rng.below(3); ++k) src.insert(static_cast<ChainId>(1 + rng.below(9)));
      // Coarse values so ties happen.
      scores.push_back({{fmt::format("c{}", rng.below(20)), src}, static_cast<double>(rng.below(4))});
    }
    const double a = 0.25 + rng.unit() * 8.0;
    const double b = static_cast<double>(rng.below(5));
    auto scaled = scores;
    for (auto& s : scaled) s.score = a * s.score + b;
    CHECK(decide(scores, CollabMethod::Judge).decision == decide(scaled, CollabMethod::Judge).decision);
  }
}

TEST_CASE("collect_candidates merges by canonical text") {
  auto s = with_conclusions({"x = 1", "x=1", "x = 2"});
  const AnswerKey strip{[](const std::string& t) {
                          std::string o;
                          for (char c : t) {
                            if (c != ' ') o += c;
                          }
                          return o;
                        },
                        true};
  const auto merged = collect_candidates(s, all_chains(s), strip);
  REQUIRE(merged.size() == 2);
  CHECK(merged[0] == CandidateAnswer{"x=1", {1, 2}});
  CHECK(merged[1] == CandidateAnswer{"x=2", {3}});

  auto same = with_conclusions({"poem", "poem"});
  const AnswerKey separate{[](const std::string& t) { return t; }, false};
  CHECK(collect_candidates(same, all_chains(same), separate).size() == 2);
}

TEST_CASE("judge_and_vote") {
  SUBCASE("argmax of chain scores") {
    auto s = with_conclusions({"a", "b", "c"});
    FunctionBackend backend([](const GenerationRequest& r) -> std::string {
      if (r.tag.ends_with("c001")) return "6.0";
      if (r.tag.ends_with("c002")) return "Score: 7.5/10";
      return "5";
    });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    const auto v = judge_and_vote(s, all_chains(s), ctx, "task", kIdentity, 3);
    CHECK(v.decision.text == "b");
    CHECK(v.method == CollabMethod::Judge);
    REQUIRE(v.audit["judgements"].size() == 3);
    CHECK(v.audit["judgements"][1]["reply"] == "Score: 7.5/10");
    CHECK(v.audit["judgements"][1]["score"] == 7.5);
    CHECK(v.warnings.empty());
    const auto reqs = backend.requests();
    REQUIRE(reqs.size() == 3);
    for (const auto& r : reqs) {
      CHECK(r.template_name == "judge");
      CHECK(r.user_prompt.find("task") != std::string::npos);
    }
  }
  SUBCASE("score parser") {
    auto s = with_conclusions({"a"});
    FunctionBackend backend([](const GenerationRequest&) { return "Score: 8/10"; });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    CHECK(judge_and_vote(s, all_chains(s), ctx, "t", kIdentity).scores[0].score == 8.0);
  }
  SUBCASE("unparseable replies fall through the tie-breaks") {
    auto s = with_conclusions({"b", "a", "b"});
    FunctionBackend backend([](const GenerationRequest&) { return "no idea"; });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    const auto v = judge_and_vote(s, all_chains(s), ctx, "t", kIdentity);
    CHECK(v.decision.text == "b");
    CHECK(v.warnings.size() == 3);
    for (const auto& sc : v.scores) CHECK(sc.score == 0.0);
  }
  SUBCASE("candidate takes the best score among its chains") {
    auto s = with_conclusions({"a", "b", "a"});
    FunctionBackend backend([](const GenerationRequest& r) -> std::string {
      if (r.tag.ends_with("c001")) return "1";
      if (r.tag.ends_with("c002")) return "6";
      return "9";
    });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    const auto v = judge_and_vote(s, all_chains(s), ctx, "t", kIdentity);
    CHECK(v.decision.text == "a");
    CHECK(v.scores[0].score == 9.0);
  }
  SUBCASE("backend errors propagate") {
    auto s = with_conclusions({"a"});
    FunctionBackend backend([](const GenerationRequest&) -> std::string { fail(Errc::BackendUnavailable, "down"); });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    CHECK(code_of([&] { judge_and_vote(s, all_chains(s), ctx, "t", kIdentity); }) == Errc::BackendUnavailable);
  }
  SUBCASE("deterministic across worker counts") {
    auto s = with_conclusions({"a", "b", "c", "d", "e"});
    auto run = [&](int workers) {
      FunctionBackend backend([](const GenerationRequest& r) {
        return fmt::format("{}", tse::testing::fnv1a(r.user_prompt) % 11);
      });
      LlmContext ctx{backend, PromptLibrary::builtin()};
      return to_json(judge_and_vote(s, all_chains(s), ctx, "t", kIdentity, workers)).dump();
    };
    CHECK(run(1) == run(4));
  }
  SUBCASE("no chains") {
    FunctionBackend backend([](const GenerationRequest&) { return "1"; });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    auto s = with_conclusions({"a"});
    CHECK(code_of([&] { judge_and_vote(s, {}, ctx, "t", kIdentity); }) == Errc::NoCandidates);
  }
}

TEST_CASE("ask_alignment parsing") {
  std::vector<std::string> warnings;
  auto ask_with = [&](std::string reply) {
    FunctionBackend backend([reply](const GenerationRequest&) { return reply; });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    return ask_alignment(ctx, "t", "step", "cand", "tag", warnings);
  };
  CHECK(ask_with("0.7") == doctest::Approx(0.7));
  CHECK(ask_with("Alignment: 8") == doctest::Approx(0.8));
  CHECK(ask_with("150") == 1.0);
  CHECK(warnings.empty());
  CHECK(ask_with("unsure") == 0.0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("collaborative weighted summation") {
  auto s = with_conclusions({"A", "A", "B"});
  // Alignment reply depends on the candidate only: A is rated higher.
  FunctionBackend backend([](const GenerationRequest& r) -> std::string {
    return r.user_prompt.find("Proposed answer: A") != std::string::npos ? "0.9" : "0.2";
  });
  LlmContext ctx{backend, PromptLibrary::builtin()};
  FakeScorer scorer;
  const auto v = collaborative_weighted_summation(s, ctx, "task", scorer, kIdentity, 2);
  CHECK(v.method == CollabMethod::Cws);
  CHECK(scorer.calls == 1);
  REQUIRE(v.scores.size() == 2);
  // Weights sum to one, so C(A) = 0.9 and C(B) = 0.2 exactly up to rounding.
  CHECK(std::fabs(v.scores[0].score - 0.9) <= 1e-12);
  CHECK(std::fabs(v.scores[1].score - 0.2) <= 1e-12);
  CHECK(v.decision.text == "A");
  const auto& nodes = v.audit["key_nodes"];
  REQUIRE(nodes.size() == 3);
  double wsum = 0;
  for (const auto& n : nodes) {
    wsum += n["weight"].get<double>();
    CHECK(n["alignments"].size() == 2);
  }
  CHECK(std::fabs(wsum - 1.0) <= 1e-9);
  // One alignment call per key node and candidate.
  CHECK(backend.requests().size() == 6);
  for (const auto& r : backend.requests()) CHECK(r.template_name == "alignment");
}

TEST_CASE("majority, sampling and new-only") {
  const std::vector<CandidateAnswer> c{{"A", {1, 2}}, {"other", {3}}};
  CHECK(majority_vote(c).decision.text == "A");
  CHECK(majority_vote(c).scores[0].score == 2.0);
  CHECK(majority_vote({{"b", {1}}, {"a", {2}}}).decision.text == "a");
  CHECK(code_of([] { majority_vote({}); }) == Errc::NoCandidates);

  const std::vector<ChainId> ids{1, 2, 3, 4, 5};
  const auto s1 = sample_subset(ids, 2, 3);
  CHECK(s1 == sample_subset(ids, 2, 3));
  CHECK(s1.size() == 2);
  CHECK(std::is_sorted(s1.begin(), s1.end()));
  CHECK(sample_subset(ids, 5, 1) == ids);
  CHECK(sample_subset(ids, 0, 1).empty());
  CHECK(code_of([&] { sample_subset(ids, 6, 1); }) == Errc::SubsetTooLarge);
  std::set<std::vector<ChainId>> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) seen.insert(sample_subset(ids, 2, seed));
  CHECK(seen.size() > 5);

  ThoughtStructure st("q");
  for (int i = 0; i < 5; ++i) st.add_chain({"a", "b"});
  for (int i = 0; i < 10; ++i) {
    NewBranch br;
    br.fusion_node_text = fmt::format("f{}", i);
    br.connection_node_id = st.chain(1).node_ids[0];
    br.source_pair = {{1, st.chain(1).node_ids[0]}, {2, st.chain(2).node_ids[0]}};
    st.attach_branch(1, br);
  }
  const auto fresh = new_chains_only(st);
  CHECK(fresh.size() == 10);
  for (ChainId id : fresh) CHECK(st.chain(id).kind == ChainKind::NewBranch);
}

TEST_CASE("collab method names") {
  for (auto m : {CollabMethod::Cws, CollabMethod::Judge, CollabMethod::Majority, CollabMethod::RandomSample,
                 CollabMethod::NewOnly}) {
    CHECK(collab_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(collab_from_string("debate"), Error);
}
