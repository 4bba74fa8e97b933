// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "synthetic_backend.hpp"
#include "tse/error.hpp"
#include "tse/prompts.hpp"
#include "tse/rng.hpp"
#include "tse/tasks/task.hpp"
#include "tse/tasks/writing.hpp"

using namespace tse;
using namespace tse::writing;
using tse::testing::FunctionBackend;

namespace {

Instance sample() {
  return Instance{{"The door was open.", "Nobody had noticed the rain.", "She laughed at last.", "It was enough."}};
}

std::string passage(const std::array<std::string, 4>& endings) {
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out += "\n\n";
    out += "Some opening words for paragraph " + std::to_string(i + 1) + ". " + endings[i];
  }
  return out;
}

}  // namespace

TEST_CASE("constraint check examples") {
  const auto inst = sample();
  const auto ok = writing_constraint_check(inst, passage(inst.end_sentences));
  CHECK(ok.all_pass());
  CHECK(ok.paragraph_count == 4);
  CHECK(ok.reason.empty());

  const auto three = writing_constraint_check(
      inst, "A. The door was open.\n\nB. Nobody had noticed the rain.\n\nC. She laughed at last.");
  CHECK(!three.all_pass());
  for (bool p : three.paragraphs) CHECK(!p);
  CHECK(three.reason.find("paragraph count") != std::string::npos);

  auto endings = inst.end_sentences;
  endings[1] = "Nobody had noticed the";
  const auto mid = writing_constraint_check(inst, passage(endings));
  CHECK(mid.paragraphs == std::array<bool, 4>{true, false, true, true});
  CHECK(mid.reason == "wrong ending in paragraph 2");
}

TEST_CASE("constraint check tolerates spacing and quotes") {
  const auto inst = sample();
  const std::string base = passage(inst.end_sentences);
  CHECK(writing_constraint_check(inst, base + "   \n\n  ").all_pass());
  auto endings = inst.end_sentences;
  endings[0] = "\"The door was open .\"";
  endings[3] = "It was enough.\xE2\x80\x9D  ";
  CHECK(writing_constraint_check(inst, passage(endings)).all_pass());
  CHECK(writing_constraint_check(inst, "\n\n" + base + "\n").all_pass());
}

TEST_CASE("compliance classification over generated passages") {
  SeededRng rng(4);
  const auto inst = sample();
  int compliant = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto endings = inst.end_sentences;
    std::array<bool, 4> expected{true, true, true, true};
    for (std::size_t i = 0; i < 4; ++i) {
      switch (rng.below(5)) {
        case 0:
          endings[i] = endings[i].substr(0, endings[i].size() / 2);
          expected[i] = false;
          break;
        case 1: endings[i] += std::string(rng.below(4), ' '); break;
        default: break;
      }
    }
    const auto c = writing_constraint_check(inst, passage(endings));
    CHECK(c.paragraphs == expected);
    compliant += c.all_pass();
  }
  CHECK(compliant > 0);
  CHECK(compliant < 200);
}

TEST_CASE("snap_score") {
  CHECK(snap_score(7.3) == 7.5);
  CHECK(snap_score(7.2) == 7.0);
  CHECK(snap_score(7.25) == 7.5);
  CHECK(snap_score(7.75) == 8.0);
  CHECK(snap_score(-1) == 0.0);
  CHECK(snap_score(12) == 10.0);
  CHECK(snap_score(NAN) == 0.0);
  for (int k = 0; k <= 20; ++k) CHECK(snap_score(k * 0.5) == k * 0.5);
  SeededRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.unit() * 10.0;
    const double s = snap_score(x);
    CHECK(std::fabs(s * 2.0 - std::round(s * 2.0)) == 0.0);
    CHECK(std::fabs(s - x) <= 0.25);
  }
}

TEST_CASE("writing judge") {
  SUBCASE("one call per dimension, overall is the mean") {
    const std::array<const char*, 4> replies{"6.0", "Score: 6.5", "5.5/10", "5.5"};
    FunctionBackend backend([&](const GenerationRequest& r) -> std::string {
      for (std::size_t i = 0; i < 4; ++i) {
        if (r.tag.find("/" + std::to_string(i + 1) + "-") != std::string::npos) return replies[i];
      }
      return "?";
    });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    const auto j = writing_judge(ctx, "task", "passage");
    CHECK(j.card.soundness == 6.0);
    CHECK(j.card.innovation == 6.5);
    CHECK(j.card.coherence == 5.5);
    CHECK(j.card.expression == 5.5);
    CHECK(j.card.overall() == 5.875);
    CHECK(j.warnings.empty());
    CHECK(backend.requests().size() == 4);
    for (const auto& r : backend.requests()) CHECK(r.template_name == "writing_judge");
  }
  SUBCASE("quantization and fallback") {
    FunctionBackend backend([](const GenerationRequest& r) -> std::string {
      return r.tag.find("/1-") != std::string::npos ? "7.3" : "great!";
    });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    const auto j = writing_judge(ctx, "task", "passage");
    CHECK(j.card.soundness == 7.5);
    CHECK(j.card.innovation == 0.0);
    CHECK(j.warnings.size() == 3);
  }
  SUBCASE("backend errors propagate") {
    FunctionBackend backend([](const GenerationRequest&) -> std::string { fail(Errc::AuthError, "no key"); });
    LlmContext ctx{backend, PromptLibrary::builtin()};
    CHECK_THROWS_AS(writing_judge(ctx, "task", "passage"), Error);
  }
}

TEST_CASE("instance files and task wiring") {
  const auto xs = parse_instances("a.\nb.\nc.\nd.\n\ne.\nf.\ng.\nh.\n");
  REQUIRE(xs.size() == 2);
  CHECK(xs[1].end_sentences[3] == "h.");
  CHECK_THROWS_AS(parse_instances("a.\nb.\n"), Error);
  const auto key = answer_key(TaskKind::Writing);
  CHECK(!key.mergeable);

  const TaskInstance inst{sample()};
  FunctionBackend backend([](const GenerationRequest&) { return "8"; });
  LlmContext ctx{backend, PromptLibrary::builtin()};
  const auto verdict = evaluate_answer(inst, passage(sample().end_sentences), ctx);
  CHECK(verdict["constraints"]["all_pass"] == true);
  CHECK(verdict["scorecard"]["soundness"] == 8.0);
  CHECK(verdict["judge_replies"].size() == 4);
}
