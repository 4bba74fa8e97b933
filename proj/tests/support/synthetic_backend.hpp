// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Test doubles: a backend that answers every template with deterministic,
// plausible text, and an in-process gradient scorer.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <regex>
#include <string>

#include <fmt/format.h>

#include "tse/llm_backend.hpp"
#include "tse/scorer_client.hpp"
#include "tse/tasks/game24.hpp"
#include "tse/text.hpp"

namespace tse::testing {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::optional<int> capture_int(const std::string& text, const std::regex& re, int group = 1) {
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nullopt;
  return std::stoi(m[group].str());
}

inline std::optional<game24::Instance> game24_from_prompt(const std::string& prompt) {
  static const std::regex re(R"(Use the numbers (\d+) (\d+) (\d+) (\d+))");
  std::smatch m;
  if (!std::regex_search(prompt, m, re)) return std::nullopt;
  return game24::Instance{{std::stoll(m[1]), std::stoll(m[2]), std::stoll(m[3]), std::stoll(m[4])}};
}

/// Final-step text for a chain or branch. `path` is the chain's path index,
/// or 0 for a new branch.
using FinalAnswer = std::function<std::string(const std::string& prompt, int path)>;

/// Game24 default: odd paths and every branch find the oracle's solution,
/// even paths settle for the plain sum.
inline std::string game24_final(const std::string& prompt, int path) {
  auto inst = game24_from_prompt(prompt);
  if (!inst) return "The answer is 24.";
  const auto& n = inst->numbers;
  if (path % 2 == 0 && path != 0) return fmt::format("So the answer is {} + {} + {} + {} = 24.", n[0], n[1], n[2], n[3]);
  if (auto e = game24::solve_24_oracle(*inst)) return fmt::format("So the answer is {} = 24.", game24::to_string(*e));
  return fmt::format("So the answer is {} * {} - {} - {} = 24.", n[0], n[1], n[2], n[3]);
}

class SyntheticBackend final : public Backend {
 public:
  explicit SyntheticBackend(FinalAnswer final_answer = game24_final) : final_(std::move(final_answer)) {}

  GenerationResponse generate(const GenerationRequest& req) override {
    {
      std::lock_guard lock(mu_);
      ++calls_;
    }
    GenerationResponse r;
    r.text = reply(req);
    r.usage.prompt_tokens = static_cast<int>(req.user_prompt.size() / 4);
    r.usage.completion_tokens = static_cast<int>(r.text.size() / 4);
    return r;
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  std::string reply(const GenerationRequest& req) const {
    const std::string& p = req.user_prompt;
    const std::uint64_t h = fnv1a(p);
    static const std::regex step_re(R"(Write step (\d+) of (\d+))");
    static const std::regex path_re(R"(reasoning path (\d+) of)");
    const std::string& t = req.template_name;

    if (t == "chain_step" || t == "branch_step") {
      std::smatch m;
      std::regex_search(p, m, step_re);
      const int step = std::stoi(m[1]);
      const int depth = std::stoi(m[2]);
      const int path = t == "chain_step" ? capture_int(p, path_re).value_or(1) : 0;
      if (step == depth) return final_(p, path);
      static const char* kMoves[] = {"multiply the two largest numbers", "look for a factor of 24",
                                     "subtract the smallest number", "pair numbers that sum to 12",
                                     "try dividing to make a fraction", "check which pair makes 6 or 4"};
      return fmt::format("Step {}: {} ({}).", step, kMoves[(h >> 8) % 6], t == "chain_step" ? "path" : "branch");
    }
    if (t == "node_rank") {
      const int count = capture_int(p, std::regex(R"(Rank the (\d+) steps)")).value_or(1);
      const int top = 1 + static_cast<int>(h % static_cast<std::uint64_t>(count));
      std::string out = std::to_string(top);
      for (int i = 1; i <= count; ++i) {
        if (i != top) out += ", " + std::to_string(i);
      }
      return out;
    }
    if (t == "fusion") return fmt::format("Combine both insights and revisit the numbers (variant {}).", h % 97);
    if (t == "semantic_connect") return (h % 2 == 0) ? "1" : "2";
    if (t == "judge") {
      auto inst = game24_from_prompt(p);
      if (inst) {
        if (auto e = game24::extract_expression(last_line(p))) {
          if (game24::verify_24(*inst, *e)) return fmt::format("Score: {}/10", 8 + h % 3);
        }
      }
      return fmt::format("Score: {}/10", 2 + h % 4);
    }
    if (t == "alignment") return fmt::format("0.{}", 1 + h % 9);
    if (t == "writing_judge") return fmt::format("{}.{}", 5 + h % 4, (h >> 4) % 2 == 0 ? 0 : 5);
    return "OK.";
  }

  static std::string last_line(const std::string& prompt) {
    const auto start = prompt.find("Candidate reasoning:");
    const auto end = prompt.find("\n\nRate this reasoning");
    if (start == std::string::npos || end == std::string::npos) return prompt;
    const std::string block = prompt.substr(start, end - start);
    return block.substr(block.rfind('\n') + 1);
  }

  FinalAnswer final_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

/// Backend whose reply is computed by a callback; throwing from the callback
/// simulates a backend error.
class FunctionBackend final : public Backend {
 public:
  using Fn = std::function<std::string(const GenerationRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}

  GenerationResponse generate(const GenerationRequest& request) override {
    GenerationResponse r;
    r.text = fn_(request);
    r.usage.completion_tokens = 1;
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    return r;
  }

  std::vector<GenerationRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  Fn fn_;
  mutable std::mutex mu_;
  std::vector<GenerationRequest> requests_;
};

/// Deterministic scorer: each norm and loss is a hash of the sentence text.
/// Shapes match the request.
class FakeScorer final : public Scorer {
 public:
  ScoreResponse score(const ScoreRequest& request) override {
    ScoreResponse r;
    r.embedding_dim = 8;
    for (const auto& chain : request.chains) {
      std::vector<double> norms;
      double total = 0;
      for (const auto& s : chain) {
        const double n = 1.0 + static_cast<double>(fnv1a(s) % 1000) / 100.0;
        norms.push_back(n);
        total += n;
      }
      std::vector<double> imps;
      for (double n : norms) imps.push_back(n / total);
      r.raw_norms.push_back(norms);
      r.importances.push_back(imps);
      r.losses.push_back(1.0 + static_cast<double>(fnv1a(chain.back()) % 500) / 250.0);
    }
    ++calls;
    return r;
  }

  int calls = 0;
};

}  // namespace tse::testing
