// Copyright (C) 2026 The tse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "tse/generation.hpp"

namespace tse::writing {

struct Instance {
  std::array<std::string, 4> end_sentences;
};

struct ConstraintCheck {
  std::array<bool, 4> paragraphs{};
  std::size_t paragraph_count = 0;
  std::string reason;  // empty when every paragraph passes

  bool all_pass() const { return paragraphs[0] && paragraphs[1] && paragraphs[2] && paragraphs[3]; }
};

/// Splits on blank lines; paragraph i passes when it ends with end sentence
/// i, ignoring trailing whitespace, closing quotes and spacing before final
/// punctuation. Any paragraph count other than four fails all four.
ConstraintCheck writing_constraint_check(const Instance& instance, std::string_view passage);

/// Nearest multiple of 0.5 in [0, 10], halves rounding up.
double snap_score(double raw);

struct Scorecard {
  double soundness = 0.0;
  double innovation = 0.0;
  double coherence = 0.0;
  double expression = 0.0;

  double overall() const { return (soundness + innovation + coherence + expression) / 4.0; }
};

struct JudgedScorecard {
  Scorecard card;
  std::vector<std::string> replies;
  std::vector<std::string> warnings;
};

/// One judge call per dimension. An unparseable reply scores 0 and is
/// reported in `warnings`.
JudgedScorecard writing_judge(const LlmContext& ctx, const std::string& task_text,
                              std::string_view passage, const std::string& tag_prefix = "5-task/judge");

/// Blocks of four non-blank lines separated by blank lines.
std::vector<Instance> parse_instances(std::string_view text);

std::string describe(const Instance& instance);

}  // namespace tse::writing
